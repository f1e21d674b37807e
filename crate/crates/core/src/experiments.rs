//! Packaged experiments: from a scenario to result tables.
//!
//! Each `run_*` function validates the scenario, builds the links it
//! needs, evaluates the matching statistics, and returns plot-ready
//! [`OutputTable`]s (see [`crate::output`] for writing them to disk).
//! All randomness derives from [`RunOptions::seed`]; rerunning with the
//! same scenario and options reproduces every value bit for bit, and the
//! worker-thread count never influences results (only wall time).
//!
//! ```
//! use risim::{experiments, Scenario};
//!
//! let scenario = Scenario::preset("fig5").unwrap();
//! let run = experiments::RunOptions { seed: 1, ensemble: 200, ..Default::default() };
//! let tables = experiments::run_acf(&scenario, &run).unwrap();
//! assert!(!tables.is_empty());
//! ```

use rayon::prelude::*;

use crate::clusters::EvolutionMode;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::irs_control::{cascaded_path_loss, optimal_phase, IrsGeometryView};
use crate::output::{Column, OutputTable, RunStamp};
use crate::scenario::Scenario;
use crate::seeds::LinkId;
use crate::stats::{
    self, CascadeProbe, CorrelationCurve, DelaySpreadSample, SweepSide,
};

/// Effective run parameters: the master seed, the estimator ensemble
/// size, the worker-thread count (0 = automatic) and an optional
/// override of the configured cluster-evolution reading.
///
/// [`RunOptions::from_scenario`] starts from the scenario's own `[run]`
/// block; constructing the struct directly (as in the module example)
/// ignores those defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub ensemble: usize,
    pub workers: usize,
    pub mode: Option<EvolutionMode>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 1, ensemble: 1000, workers: 0, mode: None }
    }
}

impl RunOptions {
    /// Seed, ensemble and workers from the scenario's `[run]` block.
    pub fn from_scenario(scenario: &Scenario) -> RunOptions {
        RunOptions {
            seed: scenario.run.seed,
            ensemble: scenario.run.ensemble,
            workers: scenario.run.workers,
            mode: None,
        }
    }

    fn effective_mode(&self, scenario: &Scenario) -> EvolutionMode {
        self.mode.unwrap_or(scenario.clusters.evolution)
    }
}

/// Non-fatal observations about a run configuration, for callers that
/// relay diagnostics (the command-line tool prints them to stderr).
pub fn warnings(scenario: &Scenario, opts: &RunOptions) -> Vec<String> {
    let mut out = Vec::new();
    if opts.ensemble < 2 {
        out.push(format!(
            "ensemble size {} leaves the correlation estimator without \
             variance control; results are a single draw, not a statistic",
            opts.ensemble
        ));
    }
    if scenario.run.acf_lag_count < 2 {
        out.push(
            "acf_lag_count 1 produces only the trivial zero-lag point".to_string(),
        );
    }
    out
}

/// Header stamp for the files of one run: tool version, scenario
/// identity, and the effective run parameters.
pub fn run_stamp(scenario: &Scenario, opts: &RunOptions) -> Result<RunStamp> {
    scenario.validate()?;
    Ok(RunStamp {
        tool: format!("risim {}", crate::VERSION),
        label: scenario.label.clone(),
        config_hash: scenario.config_hash()?,
        seed: opts.seed,
        ensemble: opts.ensemble,
        evolution_mode: opts.effective_mode(scenario).as_str().to_string(),
        resolved_config: scenario.canonical_toml()?,
    })
}

/// Run `f` on a dedicated pool of `workers` threads, or on the ambient
/// pool when `workers` is 0.  Results are identical either way; the
/// reductions inside the estimators are order-fixed.
fn with_pool<T: Send>(
    workers: usize,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::arg(format!("cannot build a {workers}-thread worker pool: {e}")))?;
    pool.install(f)
}

fn number(v: f64) -> String {
    format!("{v}")
}

/// Shared context lines of a correlation table.
fn correlation_context(
    scenario: &Scenario,
    t: f64,
    extra: Vec<(String, String)>,
) -> Vec<(String, String)> {
    let mut ctx = vec![
        ("anchor time".to_string(), format!("{} s", number(t))),
        (
            "measurement frequency".to_string(),
            format!("{} Hz", number(scenario.run.measurement_hz)),
        ),
        (
            "cluster index".to_string(),
            scenario.run.cluster_index.to_string(),
        ),
    ];
    ctx.extend(extra);
    ctx
}

fn acf_table(
    name: String,
    context: Vec<(String, String)>,
    lags: &[f64],
    sim: &CorrelationCurve,
    ana: &CorrelationCurve,
) -> OutputTable {
    let columns = vec![
        Column::new("lag", "s"),
        Column::new("sim_re", "1"),
        Column::new("sim_im", "1"),
        Column::new("sim_abs", "1"),
        Column::new("ana_re", "1"),
        Column::new("ana_im", "1"),
        Column::new("ana_abs", "1"),
    ];
    let rows = lags
        .iter()
        .enumerate()
        .map(|(i, &lag)| {
            let s = sim.normalized[i];
            let a = ana.normalized[i];
            vec![lag, s.re, s.im, s.norm(), a.re, a.im, a.norm()]
        })
        .collect();
    OutputTable { name, experiment: "acf".into(), context, columns, rows }
}

/// Time-autocorrelation curves at every configured anchor time:
/// estimator and closed form side by side, one table per anchor and
/// channel component.  `include_cascade` selects the surface-assisted
/// (cascaded) channel, `include_direct` the direct link; both honor the
/// channel Rician factors.  Curves restrict to the configured cluster.
pub fn run_acf(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<OutputTable>> {
    scenario.validate()?;
    with_pool(opts.workers, || {
        let run = &scenario.run;
        let lags = run.acf_lags();
        let cluster = Some(run.cluster_index - 1);
        let f = run.measurement_hz;
        let (bs_el, irs_el, ue_el) =
            (run.bs_element - 1, run.irs_element - 1, run.ue_element - 1);
        let mut tables = Vec::new();

        if scenario.channel.include_cascade {
            let bi = scenario.build_link(LinkId::BsIrs, opts.seed, 0, opts.mode)?;
            let iu = scenario.build_link(LinkId::IrsUe, opts.seed, 0, opts.mode)?;
            // Phase-align the probed surface element for the initial
            // geometry; a fixed setting contributes only a constant
            // phase, but it is the setting a real controller would use.
            let surface_phase = optimal_phase(
                bi.los_distance(bs_el, irs_el, 0.0)?,
                iu.los_distance(irs_el, ue_el, 0.0)?,
                scenario.wavelength(),
            )?;
            let probe = CascadeProbe {
                first_hop: &bi,
                second_hop: &iu,
                bs_element: bs_el,
                surface_element: irs_el,
                ue_element: ue_el,
                cluster,
                rician_k: scenario.channel.rician_k,
                surface_phase,
            };
            for (ai, &t) in run.acf_anchors_s.iter().enumerate() {
                let sim = stats::cascade_acf_sim(&probe, t, f, &lags, opts.ensemble)?;
                let ana = stats::cascade_acf_ana(&probe, t, f, &lags)?;
                let ctx = correlation_context(
                    scenario,
                    t,
                    vec![
                        ("component".into(), "surface-assisted cascade".into()),
                        (
                            "rician factor".into(),
                            number(scenario.channel.rician_k),
                        ),
                        ("surface phase".into(), format!("{} rad", number(surface_phase))),
                    ],
                );
                tables.push(acf_table(
                    format!("acf_irs_anchor{ai}"),
                    ctx,
                    &lags,
                    &sim,
                    &ana,
                ));
            }
        }

        if scenario.channel.include_direct {
            let bu = scenario.build_link(LinkId::BsUe, opts.seed, 0, opts.mode)?;
            let k = scenario.channel.rician_k_direct;
            for (ai, &t) in run.acf_anchors_s.iter().enumerate() {
                let sim =
                    stats::time_acf_sim(&bu, bs_el, ue_el, cluster, t, f, &lags, opts.ensemble)?;
                let nlos = stats::time_acf_ana(&bu, bs_el, ue_el, cluster, t, f, &lags)?;
                let ana = if k > 0.0 {
                    let los = stats::time_acf_los(&bu, bs_el, ue_el, t, f, &lags)?;
                    stats::time_acf_rician(&los, &nlos, k)?
                } else {
                    nlos
                };
                let ctx = correlation_context(
                    scenario,
                    t,
                    vec![
                        ("component".into(), "direct link".into()),
                        ("rician factor".into(), number(k)),
                    ],
                );
                tables.push(acf_table(
                    format!("acf_direct_anchor{ai}"),
                    ctx,
                    &lags,
                    &sim,
                    &ana,
                ));
            }
        }
        Ok(tables)
    })
}

/// Spatial cross-correlation along the base-station array of the direct
/// link, one table per configured carrier.  Unset spacings track each
/// carrier's half-wavelength, so the sweep is re-gridded per carrier;
/// the separation axis is reported in meters and in carrier wavelengths.
pub fn run_ccf(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<OutputTable>> {
    scenario.validate()?;
    with_pool(opts.workers, || {
        let run = &scenario.run;
        let carriers = if run.ccf_carriers_hz.is_empty() {
            vec![scenario.carrier_hz]
        } else {
            run.ccf_carriers_hz.clone()
        };
        let cluster = Some(run.cluster_index - 1);
        let mut tables = Vec::new();
        for (ci, &carrier) in carriers.iter().enumerate() {
            let sc = scenario.with_carrier(carrier);
            sc.validate()?;
            let bu = sc.build_link(LinkId::BsUe, opts.seed, 0, opts.mode)?;
            let (base, fixed) = (run.bs_element - 1, run.ue_element - 1);
            let t = 0.0;
            let sim = stats::spatial_ccf_sim(
                &bu,
                SweepSide::A,
                fixed,
                base,
                run.ccf_steps,
                cluster,
                t,
                run.measurement_hz,
                opts.ensemble,
            )?;
            let ana = stats::spatial_ccf_ana(
                &bu,
                SweepSide::A,
                fixed,
                base,
                run.ccf_steps,
                cluster,
                t,
                run.measurement_hz,
            )?;
            let wavelength = sc.wavelength();
            let columns = vec![
                Column::new("separation", "m"),
                Column::new("separation_wl", "carrier wavelengths"),
                Column::new("sim_re", "1"),
                Column::new("sim_im", "1"),
                Column::new("sim_abs", "1"),
                Column::new("ana_re", "1"),
                Column::new("ana_im", "1"),
                Column::new("ana_abs", "1"),
            ];
            let rows = sim
                .lags
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let s = sim.normalized[i];
                    let a = ana.normalized[i];
                    vec![d, d / wavelength, s.re, s.im, s.norm(), a.re, a.im, a.norm()]
                })
                .collect();
            let ctx = correlation_context(
                &sc,
                t,
                vec![("carrier".into(), format!("{} Hz", number(carrier)))],
            );
            tables.push(OutputTable {
                name: format!("ccf_carrier{ci}"),
                experiment: "ccf".into(),
                context: ctx,
                columns,
                rows,
            });
        }
        Ok(tables)
    })
}

fn delay_spread_samples(
    scenario: &Scenario,
    opts: &RunOptions,
    tag: &str,
) -> Result<Vec<DelaySpreadSample>> {
    let run = &scenario.run;
    let (bs_el, irs_el, ue_el) =
        (run.bs_element - 1, run.irs_element - 1, run.ue_element - 1);
    (0..run.ds_realizations as u32)
        .into_par_iter()
        .map(|instance| {
            let bi = scenario.build_link(LinkId::BsIrs, opts.seed, instance, opts.mode)?;
            let iu = scenario.build_link(LinkId::IrsUe, opts.seed, instance, opts.mode)?;
            let first = stats::link_delay_spread(&bi, bs_el, irs_el, 0.0, None)?;
            let second = stats::link_delay_spread(&iu, irs_el, ue_el, 0.0, None)?;
            Ok(DelaySpreadSample {
                ds: stats::cascaded_delay_spread(first, second),
                scenario: tag.to_string(),
                instance,
            })
        })
        .collect()
}

/// Empirical distribution of the cascaded RMS delay spread over
/// independent snapshot realizations, plus the same scenario re-realized
/// with doubled scatterer spreads: two tables, `ds_cdf_baseline` and
/// `ds_cdf_doubled`.
pub fn run_ds_cdf(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<OutputTable>> {
    scenario.validate()?;
    with_pool(opts.workers, || {
        let doubled = scenario.with_sigma_scaled(2.0);
        doubled.validate()?;
        let variants = [("baseline", scenario), ("doubled", &doubled)];
        let mut tables = Vec::new();
        for (tag, sc) in variants {
            let samples = delay_spread_samples(sc, opts, tag)?;
            let cdf = stats::ds_cdf(&samples)?;
            let rows = cdf.points().map(|(v, p)| vec![v, p]).collect();
            let sigma = sc.clusters.sigma;
            tables.push(OutputTable {
                name: format!("ds_cdf_{tag}"),
                experiment: "ds-cdf".into(),
                context: vec![
                    ("variant".into(), tag.into()),
                    (
                        "scatterer sigma".into(),
                        format!(
                            "[{}, {}, {}] m",
                            number(sigma[0]),
                            number(sigma[1]),
                            number(sigma[2])
                        ),
                    ),
                    (
                        "realizations".into(),
                        sc.run.ds_realizations.to_string(),
                    ),
                    ("median".into(), format!("{} s", number(cdf.median()))),
                ],
                columns: vec![
                    Column::new("delay_spread", "s"),
                    Column::new("cdf", "1"),
                ],
                rows,
            });
        }
        Ok(tables)
    })
}

/// Line-of-sight budget of the surface-assisted path under ideal
/// per-element phase alignment: received fraction of the transmit power
/// versus surface size (square, equal-distance idealization) and versus
/// the two hop distances scaled together.
pub fn run_pathloss(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<OutputTable>> {
    scenario.validate()?;
    let _ = opts; // deterministic closed-form sweep; no randomness, no pool
    let resolved = scenario.resolved();
    let pl = &resolved.pathloss;
    let wavelength = scenario.wavelength();
    let spacing = pl.spacing.unwrap_or(wavelength / 2.0);
    let bs = point(&resolved.bs.position);
    let irs = point(&resolved.irs.position);
    let ue = point(&resolved.ue.position);
    let d1 = bs.distance(irs);
    let d2 = irs.distance(ue);
    let p_t = pl.transmit_power_w;
    let p_t_db = 10.0 * p_t.log10();

    let loss_at = |side: usize, t_dist: f64, r_dist: f64| -> Result<f64> {
        let n = side * side;
        let view = IrsGeometryView::new(
            side,
            side,
            vec![t_dist; n],
            vec![r_dist; n],
            spacing,
            spacing,
            wavelength,
        )?;
        cascaded_path_loss(&view)
    };

    let mut size_rows = Vec::with_capacity(pl.sizes.len());
    for &m in &pl.sizes {
        let loss = loss_at(m, d1, d2)?;
        size_rows.push(vec![
            m as f64,
            (m * m) as f64,
            d1,
            d2,
            p_t,
            10.0 * loss.log10(),
            p_t_db + 10.0 * loss.log10(),
        ]);
    }
    let size_table = OutputTable {
        name: "pathloss_vs_size".into(),
        experiment: "pathloss".into(),
        context: vec![
            ("sweep".into(), "square surface side length".into()),
            ("element spacing".into(), format!("{} m", number(spacing))),
            ("geometry".into(), "equal-distance idealization".into()),
        ],
        columns: vec![
            Column::new("side", "elements"),
            Column::new("elements", "1"),
            Column::new("dist_tx", "m"),
            Column::new("dist_rx", "m"),
            Column::new("p_t", "W"),
            Column::new("pathloss", "dB"),
            Column::new("received", "dBW"),
        ],
        rows: size_rows,
    };

    let m = pl.distance_sweep_size;
    let mut dist_rows = Vec::with_capacity(pl.distance_scales.len());
    for &s in &pl.distance_scales {
        let loss = loss_at(m, d1 * s, d2 * s)?;
        dist_rows.push(vec![
            s,
            d1 * s,
            d2 * s,
            m as f64,
            p_t,
            10.0 * loss.log10(),
            p_t_db + 10.0 * loss.log10(),
        ]);
    }
    let dist_table = OutputTable {
        name: "pathloss_vs_distance".into(),
        experiment: "pathloss".into(),
        context: vec![
            ("sweep".into(), "both hop distances scaled together".into()),
            ("surface side".into(), format!("{m} elements")),
            ("element spacing".into(), format!("{} m", number(spacing))),
        ],
        columns: vec![
            Column::new("scale", "1"),
            Column::new("dist_tx", "m"),
            Column::new("dist_rx", "m"),
            Column::new("side", "elements"),
            Column::new("p_t", "W"),
            Column::new("pathloss", "dB"),
            Column::new("received", "dBW"),
        ],
        rows: dist_rows,
    };

    Ok(vec![size_table, dist_table])
}

fn point(p: &[f64; 3]) -> Vec3 {
    Vec3::new(p[0], p[1], p[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::{render_table, write_tables};

    fn small_opts(ensemble: usize) -> RunOptions {
        RunOptions { seed: 1, ensemble, workers: 0, mode: None }
    }

    #[test]
    fn acf_run_produces_one_table_per_anchor_with_unit_zero_lag() {
        let scenario = Scenario::preset("fig5").unwrap();
        let tables = run_acf(&scenario, &small_opts(16)).unwrap();
        assert_eq!(tables.len(), 2); // two anchors, cascade only
        for t in &tables {
            assert_eq!(t.rows.len(), scenario.run.acf_lag_count);
            assert_eq!(t.columns.len(), 7);
            // Zero lag: both curves exactly 1 + 0i.
            assert_eq!(t.rows[0][0], 0.0);
            assert!((t.rows[0][3] - 1.0).abs() < 1e-12, "sim zero lag");
            assert!((t.rows[0][6] - 1.0).abs() < 1e-12, "ana zero lag");
        }
        assert!(tables[0].name.contains("irs"));
    }

    #[test]
    fn acf_run_emits_both_components_when_enabled() {
        let scenario = Scenario::preset("fig6").unwrap();
        let tables = run_acf(&scenario, &small_opts(16)).unwrap();
        let names: Vec<&str> = tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["acf_irs_anchor0", "acf_direct_anchor0"]);
    }

    #[test]
    fn single_member_ensembles_run_but_warn() {
        let scenario = Scenario::preset("fig5").unwrap();
        let opts = small_opts(1);
        assert!(!warnings(&scenario, &opts).is_empty());
        let tables = run_acf(&scenario, &opts).unwrap();
        assert_eq!(tables.len(), 2);
    }

    #[test]
    fn results_do_not_depend_on_the_worker_count() {
        let scenario = Scenario::preset("fig5").unwrap();
        let stamp = run_stamp(&scenario, &small_opts(32)).unwrap();
        let render = |workers: usize| -> Vec<String> {
            let opts = RunOptions { workers, ..small_opts(32) };
            run_acf(&scenario, &opts)
                .unwrap()
                .iter()
                .map(|t| render_table(t, &stamp).unwrap())
                .collect()
        };
        assert_eq!(render(1), render(4));
    }

    #[test]
    fn ccf_run_makes_one_table_per_carrier_anchored_at_unity() {
        let mut scenario = Scenario::preset("fig5").unwrap();
        scenario.run.ccf_carriers_hz = vec![62.0e9, 2.6e9];
        let tables = run_ccf(&scenario, &small_opts(24)).unwrap();
        assert_eq!(tables.len(), 2);
        for (t, carrier) in tables.iter().zip([62.0e9, 2.6e9]) {
            assert_eq!(t.rows.len(), scenario.run.ccf_steps);
            // Zero separation in meters and wavelengths, unit magnitude.
            assert_eq!(t.rows[0][0], 0.0);
            assert!((t.rows[0][4] - 1.0).abs() < 1e-12);
            assert!((t.rows[0][7] - 1.0).abs() < 1e-12);
            // Separation of one step is half a wavelength on the
            // re-gridded array.
            let wl = crate::SPEED_OF_LIGHT / carrier;
            assert!((t.rows[1][0] - wl / 2.0).abs() < 1e-12);
            assert!((t.rows[1][1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ds_run_pairs_baseline_with_doubled_spreads() {
        let mut scenario = Scenario::preset("fig8").unwrap();
        scenario.run.ds_realizations = 150;
        let tables = run_ds_cdf(&scenario, &small_opts(8)).unwrap();
        assert_eq!(tables.len(), 2);
        let median = |t: &OutputTable| -> f64 {
            let v: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
            (v[v.len() / 2 - 1] + v[v.len() / 2]) / 2.0
        };
        assert_eq!(tables[0].name, "ds_cdf_baseline");
        assert_eq!(tables[1].name, "ds_cdf_doubled");
        for t in &tables {
            assert_eq!(t.rows.len(), 150);
            // The CDF column climbs to exactly 1.
            assert_eq!(t.rows.last().unwrap()[1], 1.0);
        }
        assert!(
            median(&tables[1]) > median(&tables[0]),
            "doubled spreads must widen the delay distribution"
        );
    }

    #[test]
    fn pathloss_matches_the_single_element_form_and_coherent_scaling() {
        let scenario = Scenario::preset("fig5").unwrap();
        let tables = run_pathloss(&scenario, &small_opts(8)).unwrap();
        assert_eq!(tables.len(), 2);
        let size = &tables[0];

        // One element at distances d1, d2: the budget collapses to
        // spacing^2 wl^2 / (64 pi^3 d1^2 d2^2).
        let wl = scenario.wavelength();
        let spacing = wl / 2.0;
        let (d1, d2) = (size.rows[0][2], size.rows[0][3]);
        assert_eq!(d1, 100.0);
        assert_eq!(d2, 200.0);
        let closed = spacing * spacing * wl * wl
            / (64.0 * std::f64::consts::PI.powi(3) * d1 * d1 * d2 * d2);
        let single_db = size.rows[0][5];
        assert!(
            (single_db - 10.0 * closed.log10()).abs() < 1e-9,
            "single-element budget: {single_db} vs {}",
            10.0 * closed.log10()
        );

        // Equal distances make every element add coherently: the
        // received fraction grows exactly with the element count
        // squared, i.e. +20 dB per tenfold element increase.
        for row in &size.rows {
            let n = row[1];
            let expect_db = single_db + 20.0 * n.log10();
            assert!(
                (row[5] - expect_db).abs() < 1e-6,
                "side {}: {} vs {}",
                row[0],
                row[5],
                expect_db
            );
        }
        // Transmit power column is constant.
        assert!(size.rows.iter().all(|r| r[4] == 1.0));

        // Scaling both distances by s costs exactly s^4 in power.
        let dist = &tables[1];
        let base = dist.rows.iter().find(|r| r[0] == 1.0).unwrap()[5];
        for row in &dist.rows {
            let expect = base - 40.0 * row[0].log10();
            assert!(
                (row[5] - expect).abs() < 1e-6,
                "scale {}: {} vs {expect}",
                row[0],
                row[5]
            );
        }
    }

    #[test]
    fn tables_render_and_write_through_the_output_layer() {
        let scenario = Scenario::preset("fig5").unwrap();
        let opts = small_opts(8);
        let stamp = run_stamp(&scenario, &opts).unwrap();
        let tables = run_pathloss(&scenario, &opts).unwrap();
        let dir = std::env::temp_dir()
            .join(format!("risim-experiments-test-{}", std::process::id()));
        let paths = write_tables(&tables, &dir, &stamp).unwrap();
        assert_eq!(paths.len(), 2);
        let text = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(text.contains("# scenario: fig5"));
        assert!(text.contains(&format!("# config hash: {}", stamp.config_hash)));
        std::fs::remove_dir_all(&dir).ok();
    }
}
