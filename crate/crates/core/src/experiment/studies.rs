use super::{Check, ExperimentConfig, PlotSeries, ResultRow, RunError, SpectrumRow, StudyOutput};
use crate::chaos::{
    chaos_tensor_bruteforce, harmonic_correspondence, max_contraction, traceless_project, wick_identity_check,
    SymmetricTensor,
};
use crate::functionals::{
    cn_coefficient, cov2nd_formulas, cov4th_formulas, fourth_chaos_coeffs, fourth_chaos_variance, fraktur_coefficient,
    moment_integral, sphere_average_h2, sphere_average_h4, uniform_exceedance, ThresholdSpec,
};
use crate::projector::{chaos_spectrum_multi, thm_louis2_check, ChaosSpectrum, ExcursionFunctionals, Functional};
use crate::rng::{fill_gaussian, gaussian_vec, stream_rng, study_tag};
use crate::special::{cqn_constants, excursion_coefficient, hermite};
use crate::stats::{dot, Ensemble};
use crate::wave::{
    build_sphere_model, build_torus_model, build_torus_window, lattice_points, FieldKind, Manifold, WaveModel,
};
use serde_json::json;
use std::f64::consts::PI;

type StudyResult = Result<StudyOutput, RunError>;

const SIGMA_LIMIT: f64 = 4.0;
const NORTH: [f64; 3] = [0.0, 0.0, 1.0];

fn max_coord(shells: &[u64]) -> i64 {
    shells.iter().flat_map(|&s| lattice_points(s)).flat_map(|p| [p[0].abs(), p[1].abs()]).max().unwrap_or(0)
}

fn build_models(cfg: &ExperimentConfig) -> Result<Vec<WaveModel>, RunError> {
    let m = &cfg.model;
    let built: crate::error::Result<Vec<WaveModel>> = match m.manifold {
        Manifold::Sphere => m.degrees.iter().map(|&l| build_sphere_model(l, cfg.grid.lat_order_for(l))).collect(),
        Manifold::Torus => {
            m.n.iter().map(|&n| build_torus_model(n, cfg.grid.resolution_for(max_coord(&[n])))).collect()
        }
    };
    built.map_err(RunError::from)
}

fn model_label(model: &WaveModel, kind: FieldKind) -> String {
    format!("{}-{}", model.manifold().name(), kind.name())
}

/// `Y(p) √(vol/N)`: the unit vector with `f(p) = ⟨y, γ⟩`.
fn unit_evaluation_vector(model: &WaveModel, p: &[f64; 3]) -> Vec<f64> {
    let s = model.gaussian_scale();
    model.basis_at(p).into_iter().map(|v| v * s).collect()
}

struct Rows<'a> {
    cfg: &'a ExperimentConfig,
    model: String,
    param: String,
    n: usize,
}

impl Rows<'_> {
    fn row(
        &self,
        u: Option<f64>,
        functional: impl Into<String>,
        estimate: f64,
        stderr: f64,
        samples: usize,
    ) -> ResultRow {
        ResultRow {
            model: self.model.clone(),
            param: self.param.clone(),
            n: self.n,
            u,
            functional: functional.into(),
            estimate,
            stderr,
            samples,
            seed: self.cfg.seed,
        }
    }

    fn spectrum(&self, functional: &str, u: Option<f64>, s: &ChaosSpectrum) -> Vec<SpectrumRow> {
        (0..=s.q_max())
            .map(|q| SpectrumRow {
                functional: functional.to_string(),
                model: self.model.clone(),
                param: self.param.clone(),
                u,
                q,
                var_q: s.variances[q],
                stderr_q: s.stderrs[q],
                samples: s.samples,
                seed: self.cfg.seed,
                condition_number: s.condition_number,
            })
            .collect()
    }
}

fn spectrum_plot(name: String, s: &ChaosSpectrum) -> PlotSeries {
    PlotSeries {
        name,
        columns: ["q".into(), "var_q".into()],
        points: (1..=s.q_max()).map(|q| (q as f64, s.variances[q])).collect(),
    }
}

/// `|a − b| / σ`, zero when both sides agree exactly.
fn sigmas(a: f64, b: f64, se: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        d / se
    }
}

fn relative_error(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub(super) fn cancellation_scan(cfg: &ExperimentConfig) -> StudyResult {
    let mut out = StudyOutput::default();
    let opts = cfg.mehler_options();
    let a = &cfg.analysis;
    let mut worst = 0.0f64;
    let mut cells = 0usize;
    for model in build_models(cfg)? {
        let param = model.param_label();
        for &kind in &cfg.model.kinds {
            let rows = Rows { cfg, model: model_label(&model, kind), param: param.clone(), n: model.dim() };
            let ef = ExcursionFunctionals::new(&model, kind, &a.thresholds, &a.functionals);
            let spectra =
                chaos_spectrum_multi(|g: &[f64], o: &mut [f64]| ef.eval(g, o), model.dim(), ef.outputs(), &opts)?;
            for ((f, u), s) in ef.labels().into_iter().zip(&spectra) {
                let name = f.name();
                out.spectrum.extend(rows.spectrum(name, Some(u), s));
                let mean_se = (s.total_variance.max(0.0) / s.samples as f64).sqrt();
                out.results.push(rows.row(Some(u), name, s.mean, mean_se, s.samples));
                out.results.push(rows.row(
                    Some(u),
                    format!("{name}.variance"),
                    s.total_variance,
                    s.total_stderr,
                    s.samples,
                ));
                out.plots.push(spectrum_plot(format!("spectrum-{}-{param}-{name}-u{u}", rows.model), s));
                if kind == FieldKind::Uniform {
                    for q in [1, 2].into_iter().filter(|&q| q <= s.q_max()) {
                        let z = s.sigmas(q);
                        worst = worst.max(z);
                        cells += 1;
                        out.checks.push(Check::at_most(
                            format!("{} param={param} {name} u={u}: |Var[{q}]|/stderr", rows.model),
                            z,
                            SIGMA_LIMIT,
                            false,
                        ));
                    }
                }
            }
        }
    }
    out.summary.insert("uniform_low_order_cells".into(), json!(cells));
    out.summary.insert("uniform_low_order_max_sigma".into(), json!(worst));
    Ok(out)
}

const COV_TERMS: [&str; 9] = [
    "cov2.hh",
    "cov2.ss",
    "cov2.cross",
    "cov4.h4_h4",
    "cov4.m22_m22",
    "cov4.s4_s4",
    "cov4.h4_m22",
    "cov4.h4_s4",
    "cov4.m22_s4",
];

fn covariance_formulas(n: usize, k: f64) -> Result<[f64; 9], RunError> {
    let c2 = cov2nd_formulas(n, k)?;
    let c4 = cov4th_formulas(n, k)?;
    Ok([c2.hh, c2.ss, c2.cross, c4.h4_h4, c4.m22_m22, c4.s4_s4, c4.h4_m22, c4.h4_s4, c4.m22_s4])
}

/// `[H₂(f), ⨍H₂(γ_x), H₄(f), H₂(f)⨍H₂(γ_x), ⨍H₄(γ_x)]` at one point.
fn point_terms(f: f64, g2: f64, n: usize) -> [f64; 5] {
    let r2 = g2 - f * f;
    let a2 = sphere_average_h2(r2, n - 1);
    [hermite(2, f), a2, hermite(4, f), hermite(2, f) * a2, sphere_average_h4(r2, n - 1)]
}

pub(super) fn covariance_check(cfg: &ExperimentConfig) -> StudyResult {
    let mut out = StudyOutput::default();
    let mut worst = 0.0f64;
    for &l in &cfg.model.degrees {
        let model = build_sphere_model(l, cfg.grid.lat_order_for(l))?;
        let n = model.dim();
        let rows = Rows { cfg, model: "sphere-gaussian".into(), param: l.to_string(), n };
        let yx = unit_evaluation_vector(&model, &NORTH);
        for &c in &cfg.analysis.pair_cosines {
            let z = [(1.0 - c * c).sqrt(), 0.0, c];
            let yz = unit_evaluation_vector(&model, &z);
            let k = dot(&yx, &yz).clamp(-1.0, 1.0);
            let ens = Ensemble::new(cfg.seed, study_tag(&format!("covariance-check/{l}/{c}")));
            let mom = ens.moments(cfg.samples, 9, |_, rng, o| {
                let g = gaussian_vec(rng, n);
                let g2 = dot(&g, &g);
                let x = point_terms(dot(&yx, &g), g2, n);
                let w = point_terms(dot(&yz, &g), g2, n);
                o.copy_from_slice(&[
                    x[0] * w[0],
                    x[1] * w[1],
                    x[0] * w[1],
                    x[2] * w[2],
                    x[3] * w[3],
                    x[4] * w[4],
                    x[2] * w[3],
                    x[2] * w[4],
                    x[3] * w[4],
                ]);
            });
            let formulas = covariance_formulas(n, k)?;
            out.results.push(rows.row(None, format!("pair.k@cos={c}"), k, 0.0, 0));
            for (j, name) in COV_TERMS.iter().enumerate() {
                let (est, se) = (mom.mean[j], mom.stderr(j));
                out.results.push(rows.row(None, format!("{name}@cos={c}"), est, se, cfg.samples));
                out.results.push(rows.row(None, format!("{name}.formula@cos={c}"), formulas[j], 0.0, 0));
                let z = sigmas(est, formulas[j], se);
                worst = worst.max(z);
                out.checks.push(Check::at_most(
                    format!("ℓ={l} cos={c} {name}: |MC − formula|/stderr"),
                    z,
                    SIGMA_LIMIT,
                    false,
                ));
            }
        }
        for (j, name) in COV_TERMS.iter().enumerate() {
            let points = (0..=100)
                .map(|i| {
                    let k = -1.0 + 0.02 * i as f64;
                    covariance_formulas(n, k).map(|f| (k, f[j]))
                })
                .collect::<Result<Vec<_>, _>>()?;
            out.plots.push(PlotSeries {
                name: format!("{name}-N{n}"),
                columns: ["k".into(), name.to_string()],
                points,
            });
        }
    }
    // Fourth moment of a scalar product of independent Gaussian vectors.
    for n in [1usize, 3, 10] {
        let ens = Ensemble::new(cfg.seed, study_tag(&format!("covariance-check/scalar4/{n}")));
        let mom = ens.moments(cfg.samples, 1, |_, rng, o| {
            let a = gaussian_vec(rng, n);
            let b = gaussian_vec(rng, n);
            o[0] = dot(&a, &b).powi(4);
        });
        let target = (3 * n * (n + 2)) as f64;
        let rows = Rows { cfg, model: "gaussian-pair".into(), param: "-".into(), n };
        out.results.push(rows.row(None, "scalar4", mom.mean[0], mom.stderr(0), cfg.samples));
        out.results.push(rows.row(None, "scalar4.formula", target, 0.0, 0));
        let z = sigmas(mom.mean[0], target, mom.stderr(0));
        worst = worst.max(z);
        out.checks.push(Check::at_most(
            format!("E⟨a,b⟩⁴ = 3N(N+2) at N={n}: |MC − formula|/stderr"),
            z,
            SIGMA_LIMIT,
            false,
        ));
    }
    out.summary.insert("max_sigma".into(), json!(worst));
    Ok(out)
}

/// A unit vector orthogonal to `y`.
fn orthogonal_unit(y: &[f64]) -> Vec<f64> {
    let j = (0..y.len()).min_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs())).expect("non-empty");
    let mut e: Vec<f64> = y.iter().map(|v| -v * y[j]).collect();
    e[j] += 1.0;
    let norm = dot(&e, &e).sqrt();
    e.iter_mut().for_each(|v| *v /= norm);
    e
}

pub(super) fn coefficient_oracle(cfg: &ExperimentConfig) -> StudyResult {
    let mut out = StudyOutput::default();
    let a = &cfg.analysis;
    let vol = 4.0 * PI;
    let mut worst = 0.0f64;
    let mut worst_limit = 0.0f64;
    for &l in &cfg.model.degrees {
        let model = build_sphere_model(l, cfg.grid.lat_order_for(l))?;
        let n = model.dim();
        let nf = n as f64;
        let rows = Rows { cfg, model: "sphere-uniform".into(), param: l.to_string(), n };
        let y = unit_evaluation_vector(&model, &NORTH);
        let e = orthogonal_unit(&y);
        let scale = model.uniform_bound();
        for &u in &a.thresholds {
            let ens = Ensemble::new(cfg.seed, study_tag(&format!("coefficient-oracle/{l}/{u}")));
            let mom = ens.moments(cfg.samples, 5, |_, rng, o| {
                let g = gaussian_vec(rng, n);
                let f = dot(&y, &g);
                let eta = dot(&e, &g);
                let ind = if scale * f / dot(&g, &g).sqrt() >= u { 1.0 } else { 0.0 };
                o[0] = ind;
                o[1] = ind * hermite(2, f);
                o[2] = ind * hermite(4, f);
                o[3] = ind * hermite(2, f) * hermite(2, eta) * (nf - 1.0);
                o[4] = ind * hermite(4, eta) * (nf * nf - 1.0) / 3.0;
            });
            let p = uniform_exceedance(n, u, vol)?;
            let c = fourth_chaos_coeffs(n, u, vol)?;
            let formulas = [p, cn_coefficient(n, u, vol)?, c.c44, c.c42, c.c40];
            for (j, name) in ["p", "C2", "C44", "C42", "C40"].iter().enumerate() {
                let (est, se) = (mom.mean[j], mom.stderr(j));
                out.results.push(rows.row(Some(u), *name, est, se, cfg.samples));
                out.results.push(rows.row(Some(u), format!("{name}.formula"), formulas[j], 0.0, 0));
                let z = sigmas(est, formulas[j], se);
                worst = worst.max(z);
                out.checks.push(Check::at_most(
                    format!("ℓ={l} u={u} {name}: |MC − formula|/stderr"),
                    z,
                    SIGMA_LIMIT,
                    false,
                ));
            }

            // Pointwise Parseval: Σ_{q ≤ Q} Σ_i 𝔉(q, i)² against p(1 − p).
            let target = p * (1.0 - p);
            let mut partial = 0.0;
            let mut points = Vec::new();
            for q in 1..=a.parseval_order {
                for i in (0..=q).step_by(2) {
                    partial += fraktur_coefficient(n, q, i, u, vol)?.powi(2);
                }
                points.push((q as f64, partial / target));
            }
            let ratio = partial / target;
            out.results.push(rows.row(Some(u), format!("parseval.ratio@Q={}", a.parseval_order), ratio, 0.0, 0));
            out.checks.push(Check::at_most(
                format!("ℓ={l} u={u}: |1 − Parseval ratio| at Q={}", a.parseval_order),
                (1.0 - ratio).abs(),
                0.01,
                false,
            ));
            out.plots.push(PlotSeries {
                name: format!("parseval-l{l}-u{u}"),
                columns: ["q".into(), "partial_over_p1p".into()],
                points,
            });
        }
    }

    // Closed forms against their large-N limits at a fixed effective level.
    let big = a.limit_n;
    let rows = Rows { cfg, model: "sphere-uniform".into(), param: "-".into(), n: big };
    for &u in &a.thresholds {
        let v = ThresholdSpec::new(big, u, vol)?.v;
        let phi = excursion_coefficient(1, v);
        let c = fourth_chaos_coeffs(big, u, vol)?;
        let pairs = [
            ("C2", cn_coefficient(big, u, vol)?, v * phi),
            ("C44", c.c44, excursion_coefficient(4, v)),
            ("C42", c.c42, -hermite(2, v) * v * phi),
            ("C40", c.c40, v * phi * (hermite(2, v) + 2.0)),
        ];
        for (name, exact, limit) in pairs {
            let err = relative_error(exact, limit);
            worst_limit = worst_limit.max(err);
            out.results.push(rows.row(Some(u), format!("{name}.limit_rel_err"), err, 0.0, 0));
            out.checks.push(Check::at_most(
                format!("N={big} u={u} {name}: relative distance to limit"),
                err,
                0.01,
                false,
            ));
        }
    }
    out.summary.insert("max_sigma".into(), json!(worst));
    out.summary.insert("max_limit_rel_err".into(), json!(worst_limit));
    Ok(out)
}

pub(super) fn asymptotics(cfg: &ExperimentConfig) -> StudyResult {
    let mut out = StudyOutput::default();
    let degrees = &cfg.model.degrees;
    for &u in &cfg.analysis.thresholds {
        let mut points = Vec::new();
        for &l in degrees {
            let n = 2 * l + 1;
            let nf = n as f64;
            let fv = fourth_chaos_variance(l, u)?;
            let rows = Rows { cfg, model: "sphere-uniform".into(), param: l.to_string(), n };
            out.results.push(rows.row(Some(u), "var4", fv.total, 0.0, 0));
            out.results.push(rows.row(Some(u), "var4.leading", fv.leading, 0.0, 0));
            out.results.push(rows.row(Some(u), "var4.remainder_bound", fv.remainder_bound, 0.0, 0));
            if fv.total > 0.0 {
                points.push((nf.ln(), (fv.total * nf * nf).ln()));
            }
        }
        if let Some(slope) = least_squares_slope(&points) {
            out.summary.insert(format!("slope_log_var4_n2_vs_log_n@u={u}"), json!(slope));
        }
        out.plots.push(PlotSeries {
            name: format!("var4-u{u}"),
            columns: ["log_N".into(), "log_var4_N2".into()],
            points,
        });
    }

    // I₄ ℓ² / log ℓ along the sweep and its doubling ratios.
    let mut scaled = Vec::new();
    for &l in degrees {
        let i4 = moment_integral(l, 4)?;
        let s = if l > 1 { i4 * (l * l) as f64 / (l as f64).ln() } else { f64::NAN };
        let rows = Rows { cfg, model: "sphere".into(), param: l.to_string(), n: 2 * l + 1 };
        out.results.push(rows.row(None, "moment4", i4, 0.0, 0));
        out.results.push(rows.row(None, "moment4.scaled", s, 0.0, 0));
        scaled.push((l, s));
    }
    for w in scaled.windows(2) {
        let ((l0, s0), (l1, s1)) = (w[0], w[1]);
        if l1 == 2 * l0 && l0 >= 64 {
            let dev = (s1 / s0 - 1.0).abs();
            out.checks.push(Check::at_most(
                format!("I₄ℓ²/log ℓ doubling ratio {l0}→{l1}: |ratio − 1|"),
                dev,
                0.1,
                false,
            ));
        }
    }
    out.plots.push(PlotSeries {
        name: "moment4-scaled".into(),
        columns: ["log_l".into(), "I4_l2_over_log_l".into()],
        points: scaled.iter().filter(|(_, s)| s.is_finite()).map(|&(l, s)| ((l as f64).ln(), s)).collect(),
    });

    // The leading term vanishes at the roots of H₃(v).
    if let Some(&l) = degrees.first() {
        let reference = fourth_chaos_variance(l, 0.3)?.leading;
        out.checks.push(Check {
            name: format!("ℓ={l}: leading term at u=0.3 is positive"),
            value: reference,
            limit: 0.0,
            passed: reference > 0.0,
            audit: true,
        });
        let r = (3.0 / (4.0 * PI)).sqrt();
        for u in [0.0, r, -r] {
            let lead = fourth_chaos_variance(l, u)?.leading;
            out.checks.push(Check::at_most(
                format!("ℓ={l}: leading term at u={u:.5} relative to u=0.3"),
                lead.abs() / reference,
                1e-12,
                true,
            ));
        }
    }
    Ok(out)
}

fn random_traceless(
    q: usize,
    n: usize,
    rng: &mut impl rand::Rng,
) -> (SymmetricTensor, SymmetricTensor, SymmetricTensor) {
    let mut k = SymmetricTensor::zeros(q, n);
    fill_gaussian(rng, k.values_mut());
    let (tl, tr) = traceless_project(&k);
    (k, tl, tr)
}

pub(super) fn tensor_verify(cfg: &ExperimentConfig) -> StudyResult {
    let mut out = StudyOutput::default();
    let a = &cfg.analysis;
    let tag = study_tag("tensor-verify");
    let mut stream = 0u64;
    let (mut wick_worst, mut trace_worst, mut orth_worst) = (0.0f64, 0.0f64, 0.0f64);
    for q in [3usize, 4] {
        for n in [3usize, 4, 5] {
            let mut wick = 0.0f64;
            for _ in 0..a.wick_tensors {
                let mut rng = stream_rng(cfg.seed, tag, stream);
                stream += 1;
                let (k, tl, tr) = random_traceless(q, n, &mut rng);
                let kn = k.norm();
                trace_worst = trace_worst.max(max_contraction(&tl) / kn);
                orth_worst = orth_worst.max(tl.inner(&tr)?.abs() / (kn * kn));
                let tn = tl.norm();
                for _ in 0..a.wick_points {
                    let g = gaussian_vec(&mut rng, n);
                    let (lhs, rhs) = wick_identity_check(&tl, &g)?;
                    // Relative to the Cauchy–Schwarz bound of either side.
                    let scale = tn * dot(&g, &g).sqrt().powi(q as i32);
                    wick = wick.max((lhs - rhs).abs() / scale);
                }
            }
            wick_worst = wick_worst.max(wick);
            let rows = Rows { cfg, model: "gaussian".into(), param: format!("q={q}"), n };
            out.results.push(rows.row(None, "wick.max_rel_discrepancy", wick, 0.0, a.wick_tensors * a.wick_points));
        }
    }
    out.checks.push(Check::at_most(
        "Wick identity on traceless tensors: max relative discrepancy",
        wick_worst,
        1e-9,
        true,
    ));
    out.checks.push(Check::at_most("traceless projection: max contraction / ‖K‖", trace_worst, 1e-10, true));
    out.checks.push(Check::at_most("traceless projection: |⟨K_TL, K − K_TL⟩| / ‖K‖²", orth_worst, 1e-10, true));

    // U¹ + (U¹)² − (U²)² at N = 2 has K₂ = diag(1/4, −1/4).
    let x = |g: &[f64]| {
        let r = dot(g, g).sqrt();
        let (u1, u2) = (g[0] / r, g[1] / r);
        u1 + u1 * u1 - u2 * u2
    };
    let est = chaos_tensor_bruteforce(x, 2, 2, a.tensor_samples, cfg.seed)?;
    let mut target = SymmetricTensor::zeros(2, 2);
    target.set(&[0, 0], 0.25);
    target.set(&[1, 1], -0.25);
    let rows = Rows { cfg, model: "gaussian".into(), param: "q=2".into(), n: 2 };
    for idx in [[0usize, 0], [0, 1], [1, 1]] {
        let name = format!("planar.K2[{}{}]", idx[0], idx[1]);
        out.results.push(rows.row(None, name, est.tensor.get(&idx), est.stderr.get(&idx), a.tensor_samples));
    }
    let dev = est.max_sigma_deviation(&target, 1e-12);
    out.checks.push(Check::at_most(
        "planar functional U¹ + (U¹)² − (U²)²: max |K̂₂ − K₂|/stderr",
        dev,
        SIGMA_LIMIT,
        true,
    ));
    out.extra_files.push(("planar_k2.txt".into(), est.tensor.to_text()));

    let c22 = cqn_constants(2, 2).0;
    out.checks.push(Check::at_most("c_{2,2} = 4", (c22 - 4.0).abs(), 1e-12, true));
    let mut harm = 0.0f64;
    for i in 0..64 {
        let t = 2.0 * PI * i as f64 / 64.0;
        let h = harmonic_correspondence(&target, &[t.cos(), t.sin()])?;
        harm = harm.max((h - (2.0 * t).cos()).abs());
    }
    out.checks.push(Check::at_most("harmonic correspondence of K₂ reproduces cos 2θ", harm, 1e-12, true));
    out.summary.insert("wick_max_rel_discrepancy".into(), json!(wick_worst));
    out.summary.insert("planar_max_sigma".into(), json!(dev));
    Ok(out)
}

pub(super) fn louis2_check(cfg: &ExperimentConfig) -> StudyResult {
    let mut out = StudyOutput::default();
    let a = &cfg.analysis;
    let opts = cfg.mehler_options();
    let res = cfg.grid.resolution_for(max_coord(&cfg.model.window));
    let window = build_torus_window(&cfg.model.window, res)?;
    let shells = window.shells().expect("torus window").to_vec();
    let mono = build_torus_model(shells[0], res)?;
    let wrows = Rows { cfg, model: "torus-uniform".into(), param: window.param_label(), n: window.dim() };
    let mrows = Rows { cfg, model: "torus-uniform".into(), param: mono.param_label(), n: mono.dim() };
    for &u in &a.thresholds {
        let r = thm_louis2_check(
            &window,
            move |v: f64, grad: f64| if v >= u { grad } else { 0.0 },
            a.tensor_samples,
            &opts,
        )?;
        out.results.push(wrows.row(
            Some(u),
            "gradient_excursion.k2_fit_residual",
            r.fit_residual,
            r.noise_floor,
            a.tensor_samples,
        ));
        out.results.push(wrows.row(
            Some(u),
            "gradient_excursion.k2_fit_coefficient",
            r.fit_coefficient,
            0.0,
            a.tensor_samples,
        ));
        out.checks.push(Check::at_most(
            format!("window {} u={u}: rank-one fit residual", wrows.param),
            r.fit_residual,
            0.1,
            false,
        ));
        out.spectrum.extend(mrows.spectrum("gradient_excursion", Some(u), &r.monochromatic));
        out.extra_files.push((format!("louis2_k2_u{u}.txt"), r.kernel.tensor.to_text()));
    }
    let ef = ExcursionFunctionals::new(&mono, FieldKind::Uniform, &a.thresholds, &[Functional::Area]);
    let spectra = chaos_spectrum_multi(|g: &[f64], o: &mut [f64]| ef.eval(g, o), mono.dim(), ef.outputs(), &opts)?;
    for ((_, u), s) in ef.labels().into_iter().zip(&spectra) {
        out.spectrum.extend(mrows.spectrum("area", Some(u), s));
        out.plots.push(spectrum_plot(format!("spectrum-torus-uniform-{}-area-u{u}", mrows.param), s));
        out.checks.push(Check::at_most(
            format!("monochromatic n={} area u={u}: |Var[2]|/stderr", mrows.param),
            s.sigmas(2),
            SIGMA_LIMIT,
            false,
        ));
    }
    Ok(out)
}
