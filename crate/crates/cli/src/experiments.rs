//! Named experiments and their result tables.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ssh_revival::analysis::{
    crossover_length, curve_distance, dense_negativity_curve, effective_length,
    ensemble_mutual_information_curve, gaussian_curve, revival_visibility, steady_state_value,
    visibility_scan, within_horizon, CurveSpec, LengthScan, TimeGrid, UniversalityCriterion,
};
use ssh_revival::chain::{build_mode_basis, localization_length_for_ratio, ChainParams};
use ssh_revival::entanglement::{
    dense_log_negativity, entropy_density_closed_form, fermionic_log_negativity, spectrum_entropy,
    EntanglementCurve, EntropyOrder, Measure, NegativityFlavor, Partition,
};
use ssh_revival::fock::{fock_dimension, FockSpace, Statistics};
use ssh_revival::lindblad::{build_occupied_state, eigenstate_populations, evolve};
use ssh_revival::semiclassical::{
    ensemble_amplitudes, green_function, semiclassical_density_operator, PopulationLaw,
};
use ssh_revival::Error as CoreError;

use crate::config::Settings;
use crate::table::{real, Cell, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Populations,
    Revival,
    Crossover,
    EffectiveLength,
    Visibility,
    MutualInformation,
    EntropyDensity,
    OracleCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Populations,
        Experiment::Revival,
        Experiment::Crossover,
        Experiment::EffectiveLength,
        Experiment::Visibility,
        Experiment::MutualInformation,
        Experiment::EntropyDensity,
        Experiment::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Populations => "populations",
            Experiment::Revival => "revival",
            Experiment::Crossover => "crossover",
            Experiment::EffectiveLength => "effective-length",
            Experiment::Visibility => "visibility",
            Experiment::MutualInformation => "mutual-information",
            Experiment::EntropyDensity => "entropy-density",
            Experiment::OracleCheck => "oracle-check",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Populations => {
                "m-particle probabilities: master equation against the closed form"
            }
            Experiment::Revival => "negativity of site 2 against the rest for several chain lengths",
            Experiment::Crossover => "smallest chain length with a universal negativity curve",
            Experiment::EffectiveLength => {
                "smallest kept prefix reproducing the reference negativity curve"
            }
            Experiment::Visibility => "revival visibility as a function of g1/g2",
            Experiment::MutualInformation => "mutual information of site 2 for several lengths",
            Experiment::EntropyDensity => "entropy per cell: closed form against dense spectra",
            Experiment::OracleCheck => "Gaussian negativity against the dense Fock-space route",
        }
    }

    pub(crate) fn uses_single_length(self) -> bool {
        matches!(self, Experiment::Populations | Experiment::Visibility)
    }

    pub(crate) fn uses_length_list(self) -> bool {
        matches!(
            self,
            Experiment::Revival
                | Experiment::MutualInformation
                | Experiment::EntropyDensity
                | Experiment::OracleCheck
        )
    }

    pub(crate) fn uses_ratio_list(self) -> bool {
        matches!(
            self,
            Experiment::Crossover
                | Experiment::EffectiveLength
                | Experiment::Visibility
                | Experiment::OracleCheck
        )
    }

    pub(crate) fn compares_curves(self) -> bool {
        matches!(self, Experiment::Revival | Experiment::MutualInformation)
    }

    pub(crate) fn fermionic_only(self) -> bool {
        matches!(
            self,
            Experiment::Crossover
                | Experiment::EffectiveLength
                | Experiment::Visibility
                | Experiment::OracleCheck
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment {s:?}, expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("resource refusal: {0}")]
    Resource(String),
    #[error("{0}")]
    Failed(#[from] CoreError),
}

impl RunError {
    fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::DimensionCap { .. } => RunError::Resource(e.to_string()),
            other => RunError::Failed(other),
        }
    }
}

/// A finished run. `mismatch` is set when an oracle comparison exceeded
/// its tolerance; the table is still complete.
#[derive(Debug)]
pub struct RunOutput {
    pub table: ResultTable,
    pub mismatch: Option<String>,
}

/// Checks the size caps without running anything.
pub fn check_resources(s: &Settings) -> Result<(), RunError> {
    let dense = |stats: Statistics, l: usize| -> Result<(), RunError> {
        let occ = s.initial.occupation(l / 2);
        let dim = fock_dimension(stats, l, occ.particles());
        if dim > s.fock_cap {
            return Err(RunError::Resource(format!(
                "{} Fock space of L = {l} with {} particles has dimension {dim}, above limits.fock_dim = {}",
                stats.name(),
                occ.particles(),
                s.fock_cap
            )));
        }
        Ok(())
    };
    match s.experiment {
        Experiment::Populations => dense(s.statistics, s.length),
        Experiment::Revival if s.statistics == Statistics::Bose => {
            s.lengths.iter().try_for_each(|&l| dense(Statistics::Bose, l))
        }
        Experiment::EntropyDensity => s.lengths.iter().try_for_each(|&l| dense(s.statistics, l)),
        Experiment::OracleCheck => s.lengths.iter().try_for_each(|&l| dense(Statistics::Fermi, l)),
        Experiment::MutualInformation if s.statistics == Statistics::Bose => {
            for &l in &s.lengths {
                let occ = s.initial.occupation(l / 2);
                let stored = ensemble_amplitudes(Statistics::Bose, l, &occ);
                if stored > s.amplitude_cap as f64 {
                    return Err(RunError::Resource(format!(
                        "bosonic ensemble of L = {l} stores {stored:.0} amplitudes, above limits.amplitudes = {}",
                        s.amplitude_cap
                    )));
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn time_columns(t: &mut ResultTable) {
    t.column("gamma_t", "1");
    t.column("t", "1/g2");
}

fn time_cells(s: &Settings, gt: f64) -> [Cell; 2] {
    [gt.into(), (gt / s.gamma_over_g2()).into()]
}

fn grid(s: &Settings) -> Result<TimeGrid, RunError> {
    Ok(TimeGrid::new(s.t_max, s.n_steps)?)
}

fn curve_spec(s: &Settings, horizon: f64) -> Result<CurveSpec, RunError> {
    let steps = ((s.n_steps as f64) * horizon / s.t_max).round().max(1.0) as usize;
    Ok(CurveSpec {
        gamma: s.gamma_over_g2(),
        subsystem: s.partition.clone(),
        initial: s.initial,
        grid: TimeGrid::new(horizon, steps)?,
    })
}

fn header(s: &Settings, measure: Option<String>) -> ResultTable {
    let mut t = ResultTable::default();
    t.meta("experiment", s.experiment);
    t.meta("version", env!("CARGO_PKG_VERSION"));
    if let Some(m) = measure {
        t.meta("measure", m);
    }
    for (k, v) in &s.echo {
        t.meta(format!("config.{k}"), v);
    }
    t
}

pub fn run(s: &Settings) -> Result<RunOutput, RunError> {
    check_resources(s)?;
    let out = match s.experiment {
        Experiment::Populations => populations(s),
        Experiment::Revival => revival(s),
        Experiment::Crossover => length_scan(s, crossover_length, "L_c"),
        Experiment::EffectiveLength => length_scan(s, effective_length, "L_eff"),
        Experiment::Visibility => visibility(s),
        Experiment::MutualInformation => mutual_information(s),
        Experiment::EntropyDensity => entropy_density(s),
        Experiment::OracleCheck => oracle_check(s),
    };
    out.map_err(|e| match e {
        RunError::Failed(core) => RunError::from_core(core),
        other => other,
    })
}

fn populations(s: &Settings) -> Result<RunOutput, RunError> {
    let params = ChainParams::new(s.length, s.g1, s.g2, s.gamma)?;
    let basis = build_mode_basis(&params);
    let occ = s.initial.occupation(params.cells());
    let space = Arc::new(FockSpace::with_cap(
        s.statistics,
        s.length,
        occ.particles(),
        s.fock_cap,
    )?);
    let rho0 = build_occupied_state(&basis, space, &occ)?;
    let gts = grid(s)?.points();
    let times: Vec<f64> = gts.iter().map(|gt| gt / s.gamma).collect();
    let law = PopulationLaw::for_basis(&basis);
    let mut t = header(s, None);
    time_columns(&mut t);
    let max_m = params.cells() + 1;
    for m in 1..=max_m {
        t.column(format!("P{m}_closed"), "1");
    }
    for m in 1..=max_m {
        t.column(format!("P{m}_qme"), "1");
    }
    let mut worst = 0.0f64;
    for (gt, rho) in gts.iter().zip(evolve(&rho0, &params, &times)?) {
        let pops = eigenstate_populations(&rho);
        let mut row: Vec<Cell> = time_cells(s, *gt).into();
        let mut qme = Vec::new();
        for m in 1..=max_m {
            let closed = law.aggregate(m, rho.time())?;
            let numeric = pops.get(&m).copied().unwrap_or(0.0);
            worst = worst.max((closed - numeric).abs());
            row.push(closed.into());
            qme.push(numeric.into());
        }
        row.extend(qme);
        t.push_row(row);
    }
    t.meta("max_abs_deviation", real(worst));
    Ok(RunOutput {
        table: t,
        mismatch: None,
    })
}

fn curves_table(
    s: &Settings,
    curves: &[EntanglementCurve],
    prefix: &str,
    unit: &str,
    revival: bool,
) -> Result<ResultTable, RunError> {
    let mut t = header(s, curves.first().map(|c| c.measure.label()));
    for c in curves {
        let l = c.params.length();
        let basis = build_mode_basis(&c.params);
        t.meta(
            format!("steady_state_L{l}"),
            real(steady_state_value(&basis, &c.partition, c.measure)),
        );
        if revival {
            let r = revival_visibility(&within_horizon(c, s.criterion.horizon))?;
            t.meta(format!("visibility_L{l}"), real(r.visibility));
            t.meta(format!("minimum_L{l}"), real(r.minimum));
            t.meta(format!("minimum_gamma_t_L{l}"), real(r.minimum_time));
        }
    }
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            t.meta(
                format!("distance_L{}_L{}", a.params.length(), b.params.length()),
                real(curve_distance(a, b, &s.criterion)?),
            );
        }
    }
    time_columns(&mut t);
    for c in curves {
        t.column(format!("{prefix}_L{}", c.params.length()), unit);
    }
    for (i, &gt) in curves[0].times.iter().enumerate() {
        let mut row: Vec<Cell> = time_cells(s, gt).into();
        row.extend(curves.iter().map(|c| Cell::from(c.values[i])));
        t.push_row(row);
    }
    Ok(t)
}

fn revival(s: &Settings) -> Result<RunOutput, RunError> {
    let spec = curve_spec(s, s.t_max)?;
    let curves = s
        .lengths
        .iter()
        .map(|&l| match s.statistics {
            Statistics::Fermi => gaussian_curve(l, s.ratio(), &spec, Measure::FermionicNegativity),
            Statistics::Bose => dense_negativity_curve(
                l,
                s.ratio(),
                &spec,
                Statistics::Bose,
                NegativityFlavor::Conventional,
                s.fock_cap,
            ),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutput {
        table: curves_table(s, &curves, "negativity", "bits", true)?,
        mismatch: None,
    })
}

fn mutual_information(s: &Settings) -> Result<RunOutput, RunError> {
    let spec = curve_spec(s, s.t_max)?;
    let curves = s
        .lengths
        .iter()
        .map(|&l| match s.statistics {
            Statistics::Fermi => {
                gaussian_curve(l, s.ratio(), &spec, Measure::MutualInformation(s.order))
            }
            Statistics::Bose => ensemble_mutual_information_curve(
                l,
                s.ratio(),
                &spec,
                Statistics::Bose,
                s.order,
                s.amplitude_cap,
            ),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutput {
        table: curves_table(s, &curves, "mutual_information", "bits", false)?,
        mismatch: None,
    })
}

type Scan = fn(f64, &UniversalityCriterion, &CurveSpec) -> ssh_revival::Result<LengthScan>;

fn length_scan(s: &Settings, scan: Scan, name: &str) -> Result<RunOutput, RunError> {
    let mut t = header(s, Some(Measure::FermionicNegativity.label()));
    t.column("ratio", "g1/g2");
    t.column("xi", "sites");
    t.column(name, "sites");
    for h in &s.sensitivity {
        t.column(format!("{name}_horizon_{h}"), "sites");
    }
    for &q in &s.ratios {
        let mut row = vec![
            Cell::from(q),
            Cell::from(localization_length_for_ratio(q)?),
            Cell::from(scan(q, &s.criterion, &curve_spec(s, s.criterion.horizon)?)?.result),
        ];
        for &h in &s.sensitivity {
            let crit = UniversalityCriterion {
                horizon: h,
                ..s.criterion
            };
            row.push(Cell::from(scan(q, &crit, &curve_spec(s, h)?)?.result));
        }
        t.push_row(row);
    }
    Ok(RunOutput {
        table: t,
        mismatch: None,
    })
}

fn visibility(s: &Settings) -> Result<RunOutput, RunError> {
    let spec = curve_spec(s, s.criterion.horizon)?;
    let mut t = header(s, Some(Measure::FermionicNegativity.label()));
    t.meta("length", s.length);
    t.column("ratio", "g1/g2");
    t.column("visibility", "bits");
    t.column("minimum", "bits");
    t.column("minimum_gamma_t", "1");
    t.column("asymptote", "bits");
    for (q, r) in visibility_scan(s.length, &s.ratios, &spec)? {
        t.push_row(vec![
            q.into(),
            r.visibility.into(),
            r.minimum.into(),
            r.minimum_time.into(),
            r.asymptote.into(),
        ]);
    }
    Ok(RunOutput {
        table: t,
        mismatch: None,
    })
}

fn entropy_density(s: &Settings) -> Result<RunOutput, RunError> {
    let orders = [EntropyOrder::VonNeumann, EntropyOrder::Renyi(2.0)];
    let gts = grid(s)?.points();
    let mut t = header(s, None);
    time_columns(&mut t);
    for o in orders {
        t.column(format!("s_{}_closed", o.label()), "bits");
    }
    for &l in &s.lengths {
        for o in orders {
            t.column(format!("s_{}_L{l}", o.label()), "bits");
        }
    }
    let setups = s
        .lengths
        .iter()
        .map(|&l| {
            let params = ChainParams::new(l, s.g1, s.g2, s.gamma)?;
            Ok((build_mode_basis(&params), s.initial.occupation(l / 2)))
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    let mut worst = 0.0f64;
    for &gt in &gts {
        let time = gt / s.gamma;
        let mut row: Vec<Cell> = time_cells(s, gt).into();
        let closed = orders
            .iter()
            .map(|&o| entropy_density_closed_form(time, s.gamma, o))
            .collect::<Result<Vec<f64>, _>>()?;
        row.extend(closed.iter().map(|&v| Cell::from(v)));
        for (basis, occ) in &setups {
            let rho = semiclassical_density_operator(basis, time, s.statistics, occ, s.fock_cap)?;
            let spectrum = rho.eigenvalues();
            let cells = occ.occupied_bulk().len().max(1) as f64;
            for (i, &o) in orders.iter().enumerate() {
                let v = spectrum_entropy(&spectrum, o) / cells;
                if s.initial == ssh_revival::analysis::InitialState::Ground {
                    worst = worst.max((v - closed[i]).abs());
                }
                row.push(v.into());
            }
        }
        t.push_row(row);
    }
    t.meta("max_abs_deviation", real(worst));
    let mismatch = (worst > s.oracle_tolerance).then(|| {
        format!(
            "entropy density differs from the closed form by {worst:e} (tolerance {:e})",
            s.oracle_tolerance
        )
    });
    Ok(RunOutput { table: t, mismatch })
}

fn oracle_check(s: &Settings) -> Result<RunOutput, RunError> {
    let gts = grid(s)?.points();
    let mut t = header(s, Some(Measure::FermionicNegativity.label()));
    t.column("length", "sites");
    t.column("ratio", "g1/g2");
    t.column("gamma_t", "1");
    t.column("gaussian", "bits");
    t.column("dense", "bits");
    t.column("abs_diff", "bits");
    let mut worst = 0.0f64;
    for &l in &s.lengths {
        let part = Partition::new(l, s.partition.iter().copied())?;
        for &q in &s.ratios {
            let params = ChainParams::with_ratio(l, q, s.gamma_over_g2())?;
            let basis = build_mode_basis(&params);
            let occ = s.initial.occupation(l / 2);
            for &gt in &gts {
                let time = gt / params.gamma();
                let gauss = fermionic_log_negativity(&green_function(&basis, time, &occ), &part)?;
                let rho = semiclassical_density_operator(
                    &basis,
                    time,
                    Statistics::Fermi,
                    &occ,
                    s.fock_cap,
                )?;
                let dense = dense_log_negativity(&rho, &part, NegativityFlavor::Fermionic)?;
                let diff = (gauss - dense).abs();
                worst = worst.max(diff);
                t.push_row(vec![
                    l.into(),
                    q.into(),
                    gt.into(),
                    gauss.into(),
                    dense.into(),
                    diff.into(),
                ]);
            }
        }
    }
    t.meta("max_abs_diff", real(worst));
    let mismatch = (worst > s.oracle_tolerance).then(|| {
        format!(
            "Gaussian and dense negativities differ by {worst:e} (tolerance {:e})",
            s.oracle_tolerance
        )
    });
    Ok(RunOutput { table: t, mismatch })
}
