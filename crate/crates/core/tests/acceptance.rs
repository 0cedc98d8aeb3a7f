//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line (visible with `--nocapture`) and fails when the criterion does.

mod common;

use std::f64::consts::{E, LN_2, PI};
use std::path::Path;
use std::process::Command as Proc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use common::*;
use skewinfo::cli::{render, Command, CurveArgs, CurveFamilyArg, RunArgs};
use skewinfo::entropy::{entropy, entropy_closed, entropy_expanded_cfusn, entropy_mc, expansion_bracket, mvn_entropy};
use skewinfo::information::{kl_direct, kl_lcfusn_vs_lsn, mutual_information, Direction, LsnSpec};
use skewinfo::numerics::chol_decompose;
use skewinfo::oracle::{entropy_quadrature, kl_quadrature, mi_quadrature};
use skewinfo::{Block, DistributionSpec, LogDensity, Partition, SeedStream, SkewnessMatrix};

const N_MC: usize = 100_000;

struct Report {
    id: u32,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Report {
    fn new(id: u32) -> Self {
        Report {
            id,
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self) {
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {status} ({})", self.id, self.notes.join("; "));
        for f in &self.failures {
            println!("  criterion {} failure: {f}", self.id);
        }
        assert!(
            self.failures.is_empty(),
            "criterion {} failed: {:?}",
            self.id,
            self.failures
        );
    }
}

fn mc_stream(root: u64) -> SeedStream {
    SeedStream::with_domain(root, "entropy")
}

#[test]
fn criterion_01_closed_forms() {
    let mut rep = Report::new(1);
    let mut r = rng(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mu = r.random_range(-5.0..5.0);
        let sigma = r.random_range(0.05..5.0);
        let two_pi_e = 2.0 * PI * E;

        let h = entropy_closed(&DistributionSpec::normal(mu, sigma).unwrap()).unwrap();
        let expect = 0.5 * (two_pi_e * sigma * sigma).ln();
        worst = worst.max((h - expect).abs());

        let h = entropy_closed(&DistributionSpec::log_normal(mu, sigma).unwrap()).unwrap();
        let expect = mu + 0.5 * (two_pi_e * sigma * sigma).ln();
        worst = worst.max((h - expect).abs());

        let n = r.random_range(1..=5);
        let s = random_sigma(&mut r, n);
        let mv = DVector::from_fn(n, |_, _| r.random_range(-3.0..3.0));
        let expect = 0.5 * (two_pi_e.powi(n as i32) * s.determinant()).ln();
        let h = mvn_entropy(&chol_decompose(&s).unwrap());
        worst = worst.max((h - expect).abs());
        let zero = DistributionSpec::cfusn(mv, s, DMatrix::zeros(n, 1)).unwrap();
        let h = entropy_closed(&zero).unwrap();
        worst = worst.max((h - expect).abs());
    }
    let elapsed = start.elapsed();
    rep.note(format!("max abs error {worst:.2e} over 50 sets, {elapsed:?}"));
    rep.check(worst < 1e-12, || format!("max abs error {worst:e}"));
    rep.check(elapsed < Duration::from_secs(1), || format!("runtime {elapsed:?}"));
    rep.finish();
}

#[test]
fn criterion_02_entropy_matches_quadrature() {
    let mut rep = Report::new(2);
    let mut r = rng(202);
    let cfg = quad_cfg();
    let start = Instant::now();
    let mut worst_z = 0.0f64;
    let mut count = 0;
    for family in ["sn", "lsn", "cfusn", "lcfusn"] {
        for i in 0..20 {
            let spec = match family {
                "sn" => DistributionSpec::skew_normal(
                    r.random_range(-2.0..2.0),
                    r.random_range(0.3..3.0),
                    r.random_range(-6.0..6.0),
                )
                .unwrap(),
                "lsn" => DistributionSpec::log_skew_normal(
                    r.random_range(-1.0..1.0),
                    r.random_range(0.3..1.5),
                    r.random_range(-6.0..6.0),
                )
                .unwrap(),
                _ => {
                    let (n, m) = [(1, 1), (1, 2), (2, 1), (2, 2)][i % 4];
                    random_cfusn(&mut r, n, m, family == "lcfusn")
                }
            };
            let e = entropy_mc(&spec, &mc_stream(i as u64), N_MC).unwrap();
            let q = entropy_quadrature(&spec, &cfg).unwrap();
            let diff = (e.value - q).abs();
            let tol = 3.0 * e.std_error + 1e-5;
            worst_z = worst_z.max(diff / tol);
            count += 1;
            rep.check(diff < tol, || {
                format!("{}: mc {} quad {q} diff {diff:e} tol {tol:e}", spec.describe(), e.value)
            });
        }
    }
    let elapsed = start.elapsed();
    rep.note(format!("{count} draws, worst |diff|/tol {worst_z:.3}, {elapsed:?}"));
    rep.check(elapsed < Duration::from_secs(300), || format!("runtime {elapsed:?}"));
    rep.finish();
}

#[test]
fn criterion_03_limit_laws() {
    let mut rep = Report::new(3);
    let s = mc_stream(3);

    let big = entropy(&DistributionSpec::skew_normal(0.0, 1.0, 1e4).unwrap(), &s, N_MC).unwrap();
    let target = H_N01 - LN_2;
    let d = (big.value - target).abs();
    rep.note(format!("SN alpha=1e4 off by {d:.2e}"));
    rep.check(d < 3.0 * big.std_error + 1e-3, || {
        format!("SN(0,1,1e4) = {} vs {target}", big.value)
    });

    let zero = entropy(&DistributionSpec::skew_normal(0.0, 1.0, 0.0).unwrap(), &s, N_MC).unwrap();
    let normal = entropy(&DistributionSpec::normal(0.0, 1.0).unwrap(), &s, N_MC).unwrap();
    rep.check(
        zero.value.to_bits() == normal.value.to_bits() && zero.std_error == 0.0,
        || format!("SN(0,1,0) = {} vs {}", zero.value, normal.value),
    );

    let lzero = entropy(&DistributionSpec::log_skew_normal(0.0, 1.0, 0.0).unwrap(), &s, N_MC).unwrap();
    let ln = entropy(&DistributionSpec::log_normal(0.0, 1.0).unwrap(), &s, N_MC).unwrap();
    rep.check(
        lzero.value.to_bits() == ln.value.to_bits() && lzero.std_error == 0.0,
        || format!("LSN(0,1,0) = {} vs LN(0,1) = {}", lzero.value, ln.value),
    );

    let lbig = entropy(&DistributionSpec::log_skew_normal(0.0, 1.0, 1e4).unwrap(), &s, N_MC).unwrap();
    let target = H_N01 + (2.0 / PI).sqrt() - LN_2;
    let d = (lbig.value - target).abs();
    rep.note(format!("LSN alpha=1e4 off by {d:.2e}"));
    rep.check(d < 3.0 * lbig.std_error + 1e-3, || {
        format!("LSN(0,1,1e4) = {} vs {target}", lbig.value)
    });
    rep.finish();
}

#[test]
fn criterion_04_log_shift_identity() {
    let mut rep = Report::new(4);
    let mut r = rng(404);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = 1 + i % 4;
        let m = 1 + (i / 4) % 3;
        let mu = random_mu(&mut r, n);
        let sigma = random_sigma(&mut r, n);
        let delta = random_delta(&mut r, n, m, 0.9);
        let c = DistributionSpec::cfusn(mu.clone(), sigma.clone(), delta.clone()).unwrap();
        let l = DistributionSpec::lcfusn(mu, sigma, delta).unwrap();
        let s = mc_stream(i as u64);
        let hc = entropy_mc(&c, &s, 4096).unwrap();
        let hl = entropy_mc(&l, &s, 4096).unwrap();
        let shift = c.mean().unwrap().sum();
        let err = ((hl.value - hc.value) - shift).abs();
        worst = worst.max(err);
        rep.check(err < 1e-12, || format!("n={n} m={m}: shift error {err:e}"));
    }
    rep.note(format!("max error {worst:.2e} over 20 draws"));
    rep.finish();
}

#[test]
fn criterion_05_orthogonal_columns() {
    let mut rep = Report::new(5);
    let mut r = rng(505);
    let mut cases = vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, -0.5])];
    for i in 0..12 {
        let n = 2 + i % 3;
        let m = 1 + i % n;
        cases.push(orthogonal_delta(&mut r, n, m));
    }
    let mut worst = 0.0f64;
    for (i, d) in cases.into_iter().enumerate() {
        let n = d.nrows();
        let bracket = expansion_bracket(&d);
        worst = worst.max(bracket.abs());
        rep.check(bracket.abs() < 1e-12, || format!("case {i}: bracket {bracket:e}"));
        let spec = DistributionSpec::cfusn(random_mu(&mut r, n), random_sigma(&mut r, n), d).unwrap();
        let DistributionSpec::Cfusn(c) = &spec else {
            unreachable!()
        };
        let s = mc_stream(i as u64);
        let a = entropy_expanded_cfusn(c.skew(), c.loc().sigma(), &s, 4096).unwrap();
        let b = entropy_mc(&spec, &s, 4096).unwrap();
        rep.check(a.value.to_bits() == b.value.to_bits(), || {
            format!("case {i}: expanded {} vs mc {}", a.value, b.value)
        });
    }
    rep.note(format!("max |bracket| {worst:.2e}, expanded == mc bitwise"));
    rep.finish();
}

#[test]
fn criterion_06_mutual_information() {
    let mut rep = Report::new(6);
    let stream = SeedStream::with_domain(6, "mutinfo");

    let independent = [
        (
            DMatrix::from_row_slice(2, 2, &[0.6, 0.0, 0.0, -0.5]),
            Partition::new(1, 1).unwrap(),
        ),
        (
            DMatrix::from_row_slice(3, 2, &[0.4, 0.0, -0.5, 0.0, 0.0, 0.8]),
            Partition::new(2, 1).unwrap(),
        ),
    ];
    for (d, part) in independent {
        let e = mutual_information(&SkewnessMatrix::new(d).unwrap(), &part, &stream, N_MC).unwrap();
        rep.note(format!("independent I = {:.2e} (SE {:.2e})", e.value, e.std_error));
        rep.check(e.value.abs() <= 3.0 * e.std_error + 1e-12, || {
            format!("independent blocks: I = {} SE {}", e.value, e.std_error)
        });
    }

    let delta = SkewnessMatrix::column(&[0.7, 0.7]).unwrap();
    let part = Partition::new(1, 1).unwrap();
    let e = mutual_information(&delta, &part, &stream, N_MC).unwrap();
    let q = mi_quadrature(&delta, &part, &quad_cfg()).unwrap();
    rep.note(format!("dependent I = {:.6} vs quadrature {q:.6}", e.value));
    rep.check((e.value - q).abs() < 3.0 * e.std_error + 1e-5, || {
        format!("dependent: mc {} quad {q} SE {}", e.value, e.std_error)
    });

    let joint = DistributionSpec::lcfusn(DVector::zeros(2), DMatrix::identity(2, 2), delta.matrix().clone()).unwrap();
    let y1 = joint.marginal(&part, Block::First).unwrap();
    let y2 = joint.marginal(&part, Block::Second).unwrap();
    let h = entropy_mc(&joint, &SeedStream::with_domain(61, "entropy"), N_MC).unwrap();
    let h1 = entropy_mc(&y1, &SeedStream::with_domain(62, "entropy"), N_MC).unwrap();
    let h2 = entropy_mc(&y2, &SeedStream::with_domain(63, "entropy"), N_MC).unwrap();
    let via_entropies = h1.value + h2.value - h.value;
    let se = combined_se(&[e.std_error, h.std_error, h1.std_error, h2.std_error]);
    rep.note(format!("H1 + H2 - H = {via_entropies:.6}"));
    rep.check((via_entropies - e.value).abs() < 3.0 * se, || {
        format!("decomposition {via_entropies} vs {} (combined SE {se})", e.value)
    });
    rep.finish();
}

#[test]
fn criterion_07_divergence() {
    let mut rep = Report::new(7);
    let mut r = rng(707);
    let cfg = quad_cfg();

    let mut worst_matched = 0.0f64;
    for i in 0..6 {
        let n = 1 + i % 3;
        let z = random_cfusn(&mut r, n, 1, true);
        let DistributionSpec::LogCfusn(c) = &z else {
            unreachable!()
        };
        let y = LsnSpec::matching(c).unwrap();
        for dir in [Direction::ZToY, Direction::YToZ] {
            let e = kl_lcfusn_vs_lsn(&z, &y, dir, &SeedStream::with_domain(i as u64, "kl"), 20_000).unwrap();
            worst_matched = worst_matched.max(e.value.abs());
            rep.check(e.value.abs() <= 3.0 * e.std_error + 1e-12, || {
                format!("matched pair n={n} {dir:?}: D = {} SE {}", e.value, e.std_error)
            });
        }
    }
    rep.note(format!("matched pairs max |D| {worst_matched:.1e}"));

    let mut worst_q = 0.0f64;
    let mut worst_d = 0.0f64;
    for i in 0..10 {
        let mu = r.random_range(-1.0..1.0);
        let sd: f64 = r.random_range(0.3..1.5);
        let delta = r.random_range(-0.9..0.9);
        let alpha = r.random_range(-4.0..4.0);
        let z = DistributionSpec::lcfusn(
            DVector::from_element(1, mu),
            DMatrix::from_element(1, 1, sd * sd),
            DMatrix::from_element(1, 1, delta),
        )
        .unwrap();
        let y = LsnSpec::new(
            DVector::from_element(1, mu),
            DMatrix::from_element(1, 1, sd * sd),
            DVector::from_element(1, alpha),
        )
        .unwrap();
        let e = kl_lcfusn_vs_lsn(&z, &y, Direction::ZToY, &SeedStream::with_domain(i, "kl"), N_MC).unwrap();
        let q = kl_quadrature(&z, &y, &cfg).unwrap();
        let d = kl_direct(&z, &y, &SeedStream::with_domain(i, "kl-direct"), N_MC).unwrap();
        let tq = 3.0 * e.std_error + cfg.abs_tol;
        let td = 3.0 * combined_se(&[e.std_error, d.std_error]);
        worst_q = worst_q.max((e.value - q).abs() / tq);
        worst_d = worst_d.max((e.value - d.value).abs() / td);
        rep.check((e.value - q).abs() < tq, || {
            format!("delta={delta} alpha={alpha}: estimator {} quadrature {q}", e.value)
        });
        rep.check((e.value - d.value).abs() < td, || {
            format!("delta={delta} alpha={alpha}: estimator {} direct {}", e.value, d.value)
        });
    }
    rep.note(format!(
        "n=1 worst |diff|/tol: quadrature {worst_q:.2}, direct {worst_d:.2}"
    ));

    let mut min_z = f64::INFINITY;
    for i in 0..20 {
        let n = 1 + i % 3;
        let m = 1 + i % 2;
        let mu = random_mu(&mut r, n);
        let sigma = random_sigma(&mut r, n);
        let z = DistributionSpec::lcfusn(mu.clone(), sigma.clone(), random_delta(&mut r, n, m, 0.9)).unwrap();
        let alpha = DVector::from_fn(n, |_, _| r.random_range(-3.0..3.0));
        let y = LsnSpec::new(mu, sigma, alpha).unwrap();
        for dir in [Direction::ZToY, Direction::YToZ] {
            let e = kl_lcfusn_vs_lsn(&z, &y, dir, &SeedStream::with_domain(100 + i as u64, "kl"), 20_000).unwrap();
            if e.std_error > 0.0 {
                min_z = min_z.min(e.value / e.std_error);
            }
            rep.check(e.value >= -3.0 * e.std_error, || {
                format!("draw {i} {dir:?}: D = {} SE {}", e.value, e.std_error)
            });
        }
    }
    rep.note(format!("nonnegativity min D/SE {min_z:.1}"));
    rep.finish();
}

struct CurveRow {
    key: f64,
    x: f64,
    y: f64,
    h: f64,
    se: f64,
}

fn curve_rows(family: CurveFamilyArg, grid: &str, sigma2: &str) -> Vec<CurveRow> {
    let cmd = Command::Curve(CurveArgs {
        family,
        grid: grid.into(),
        grid2: None,
        sigma2: sigma2.into(),
        run: RunArgs {
            samples: N_MC,
            seed: 0,
            out: None,
            bits: false,
        },
    });
    let out = render(&cmd).unwrap();
    assert!(out.plot_script.is_some());
    out.csv
        .lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let p = |i: usize| f[i].parse::<f64>().unwrap();
            if family == CurveFamilyArg::Cfusn12 {
                CurveRow {
                    key: 0.0,
                    x: p(1),
                    y: p(2),
                    h: p(3),
                    se: p(4),
                }
            } else {
                CurveRow {
                    key: p(1),
                    x: p(2),
                    y: 0.0,
                    h: p(3),
                    se: p(4),
                }
            }
        })
        .collect()
}

#[test]
fn criterion_08_figures() {
    let mut rep = Report::new(8);
    let start = Instant::now();

    let sn = curve_rows(CurveFamilyArg::Sn, "0:10:0.5", "1,2,3");
    rep.check(sn.len() == 63, || format!("SN curve has {} rows", sn.len()));
    let by_var = |v: f64| sn.iter().filter(|row| row.key == v).collect::<Vec<_>>();
    let base = by_var(1.0);
    for v in [1.0, 2.0, 3.0] {
        let c = by_var(v);
        for w in c.windows(2) {
            let rise = w[1].h - w[0].h;
            rep.check(rise <= 3.0 * combined_se(&[w[0].se, w[1].se]), || {
                format!("SN sigma2={v}: H rises by {rise:e} from alpha={} to {}", w[0].x, w[1].x)
            });
        }
        for (a, b) in base.iter().zip(&c) {
            let shift = b.h - a.h;
            let expect = 0.5 * v.ln();
            rep.check(
                (shift - expect).abs() <= 3.0 * combined_se(&[a.se, b.se]) + 1e-12,
                || format!("SN alpha={}: sigma2 shift {shift} vs {expect}", a.x),
            );
        }
    }
    rep.note(format!(
        "SN nonincreasing, H(0)={:.6} -> H(10)={:.6}",
        base[0].h,
        base[base.len() - 1].h
    ));

    let lsn = curve_rows(CurveFamilyArg::Lsn, "0:10:0.5", "1");
    let (imax, top) = lsn.iter().enumerate().max_by(|a, b| a.1.h.total_cmp(&b.1.h)).unwrap();
    let last = lsn.len() - 1;
    let interior = imax > 0 && imax < last;
    let margin0 = top.h - lsn[0].h - 3.0 * combined_se(&[top.se, lsn[0].se]);
    let margin1 = top.h - lsn[last].h - 3.0 * combined_se(&[top.se, lsn[last].se]);
    rep.note(format!("LSN maximum {:.6} at alpha={}", top.h, top.x));
    rep.check(interior && margin0 > 0.0 && margin1 > 0.0, || {
        format!(
            "LSN maximum at alpha={} (index {imax}), margins {margin0:e} {margin1:e}",
            top.x
        )
    });

    let surf = curve_rows(CurveFamilyArg::Cfusn12, "-0.7:0.7:0.1", "1");
    rep.check(surf.len() == 225, || format!("surface has {} points", surf.len()));
    match surf.iter().find(|row| row.x == 0.0 && row.y == 0.0) {
        Some(c) => {
            let exact = mvn_entropy(&chol_decompose(&DMatrix::identity(1, 1)).unwrap());
            rep.note(format!("surface centre {:.7}", c.h));
            rep.check(c.h.to_bits() == exact.to_bits() && c.se == 0.0, || {
                format!("centre {} vs {exact}", c.h)
            });
            rep.check(format!("{:.7}", c.h) == "1.4189385", || format!("centre {}", c.h));
            let off = surf.iter().filter(|row| row.x != 0.0 || row.y != 0.0);
            rep.check(off.clone().all(|row| row.h < c.h), || {
                "surface maximum not at the centre".into()
            });
        }
        None => rep.check(false, || "no grid point at delta = 0".into()),
    }

    let elapsed = start.elapsed();
    rep.note(format!("{elapsed:?}"));
    rep.check(elapsed < Duration::from_secs(600), || format!("runtime {elapsed:?}"));
    rep.finish();
}

fn ks_case(rep: &mut Report, spec: &DistributionSpec, seed: u64) {
    let n = N_MC;
    let mut r = rng(seed);
    let draws = spec.sample(&mut r, n);
    let mut xs: Vec<f64> = draws.iter().copied().collect();
    let base = spec.base();
    let (mu, sd) = match &base {
        DistributionSpec::SkewNormal { mu, sigma, .. } | DistributionSpec::Normal { mu, sigma } => (*mu, *sigma),
        DistributionSpec::Cfusn(c) => (c.loc().mu()[0], c.loc().sigma().entries()[(0, 0)].sqrt()),
        _ => unreachable!(),
    };
    let (lo, hi) = (mu - 12.0 * sd, mu + 12.0 * sd);
    let stat;
    let total;
    if spec.is_log_family() {
        let tab = TabulatedCdf::new(|t: f64| (spec.log_pdf(&[t.exp()]).unwrap() + t).exp(), lo, hi, 4000);
        total = tab.total();
        stat = ks_statistic(&mut xs, |y| tab.eval(y.ln()));
    } else {
        let tab = TabulatedCdf::new(|x: f64| spec.log_pdf(&[x]).unwrap().exp(), lo, hi, 4000);
        total = tab.total();
        stat = ks_statistic(&mut xs, |x| tab.eval(x));
    }
    let crit = ks_critical_1pct(n);
    rep.note(format!("{} D={stat:.4}", spec.family()));
    rep.check((total - 1.0).abs() < 1e-8, || {
        format!("{}: density integrates to {total}", spec.describe())
    });
    rep.check(stat < crit, || format!("{}: KS {stat} >= {crit}", spec.describe()));
}

#[test]
fn criterion_09_samplers() {
    let mut rep = Report::new(9);
    let one = |v: f64| DVector::from_element(1, v);
    let var = |s: f64| DMatrix::from_element(1, 1, s * s);
    let cases = [
        DistributionSpec::normal(0.3, 1.7).unwrap(),
        DistributionSpec::log_normal(-0.2, 0.6).unwrap(),
        DistributionSpec::skew_normal(0.5, 1.3, 3.0).unwrap(),
        DistributionSpec::log_skew_normal(0.1, 0.8, -2.0).unwrap(),
        DistributionSpec::cfusn(one(-0.4), var(0.9), DMatrix::from_element(1, 1, 0.8)).unwrap(),
        DistributionSpec::cfusn(one(1.0), var(2.0), DMatrix::from_row_slice(1, 2, &[0.6, -0.5])).unwrap(),
        DistributionSpec::lcfusn(one(0.2), var(0.5), DMatrix::from_row_slice(1, 2, &[0.5, 0.7])).unwrap(),
    ];
    for (i, spec) in cases.iter().enumerate() {
        ks_case(&mut rep, spec, 900 + i as u64);
    }

    let mu = DVector::from_column_slice(&[0.5, -1.0, 2.0]);
    let sigma = DMatrix::from_row_slice(3, 3, &[1.5, 0.3, -0.2, 0.3, 1.0, 0.4, -0.2, 0.4, 2.0]);
    let delta = DMatrix::from_row_slice(3, 2, &[0.5, 0.2, -0.3, 0.6, 0.4, -0.1]);
    let spec = DistributionSpec::cfusn(mu, sigma, delta).unwrap();
    let x = spec.sample(&mut rng(999), N_MC);
    let nn = N_MC as f64;
    let mean = spec.mean().unwrap();
    let cov = spec.variance().unwrap();
    let xbar = x.row_mean().transpose();
    let mut worst = 0.0f64;
    for i in 0..3 {
        let se = (cov[(i, i)] / nn).sqrt();
        let z = (xbar[i] - mean[i]).abs() / se;
        worst = worst.max(z);
        rep.check(z < 4.0, || format!("mean[{i}] {} vs {} ({z:.2} SE)", xbar[i], mean[i]));
    }
    for i in 0..3 {
        for j in i..3 {
            let prods: Vec<f64> = x
                .row_iter()
                .map(|row| (row[i] - xbar[i]) * (row[j] - xbar[j]))
                .collect();
            let s = prods.iter().sum::<f64>() / (nn - 1.0);
            let var_p = prods.iter().map(|p| (p - s).powi(2)).sum::<f64>() / (nn - 1.0);
            let z = (s - cov[(i, j)]).abs() / (var_p / nn).sqrt();
            worst = worst.max(z);
            rep.check(z < 4.0, || format!("cov[{i},{j}] {s} vs {} ({z:.2} SE)", cov[(i, j)]));
        }
    }
    rep.note(format!("n=3 m=2 moments worst {worst:.2} SE"));
    rep.finish();
}

fn run_cli(args: &[&str], dir: &Path) -> (bool, String) {
    let out = Proc::new(env!("CARGO_BIN_EXE_skewinfo"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr),
    )
}

#[test]
fn criterion_10_determinism() {
    let mut rep = Report::new(10);
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(
        dir.join("z.json"),
        r#"{"family": "lcfusn", "mu": [0.1, -0.2], "sigma": [[1.0, 0.3], [0.3, 0.8]], "delta": [[0.5, 0.1], [0.2, -0.6]]}"#,
    )
    .unwrap();
    std::fs::write(dir.join("c.json"), r#"{"family": "lcfusn", "delta": [[0.7], [0.7]]}"#).unwrap();
    std::fs::write(
        dir.join("z1.json"),
        r#"{"family": "lcfusn", "mu": [0.1, -0.2], "sigma": [[1.0, 0.3], [0.3, 0.8]], "delta": [[0.5], [0.2]]}"#,
    )
    .unwrap();
    std::fs::write(
        dir.join("y.json"),
        r#"{"family": "lsn", "mu": [0.1, -0.2], "sigma": [[1.0, 0.3], [0.3, 0.8]], "alpha": [1.0, -0.5]}"#,
    )
    .unwrap();

    let runs: [&[&str]; 5] = [
        &[
            "entropy",
            "--spec",
            "z.json",
            "--samples",
            "30000",
            "--seed",
            "5",
            "--out",
            "entropy.csv",
        ],
        &[
            "mutinfo",
            "--spec",
            "c.json",
            "--partition",
            "1",
            "--samples",
            "30000",
            "--out",
            "mi.csv",
        ],
        &[
            "kl",
            "--spec",
            "z1.json",
            "--lsn",
            "y.json",
            "--direct",
            "--samples",
            "30000",
            "--out",
            "kl.csv",
        ],
        &[
            "curve",
            "--family",
            "sn",
            "--grid",
            "0:2:0.5",
            "--sigma2",
            "1,2",
            "--samples",
            "5000",
            "--out",
            "curve.csv",
        ],
        &[
            "sample",
            "--spec",
            "z.json",
            "--count",
            "5000",
            "--seed",
            "3",
            "--out",
            "sample.csv",
        ],
    ];
    for args in runs {
        let out = args[args.len() - 1];
        let (ok, log) = run_cli(args, dir);
        rep.check(ok, || format!("{}: {log}", args[0]));
        let manifest = format!("{out}.manifest.json");
        let replayed = format!("replayed-{out}");
        let (ok, log) = run_cli(&["replay", "--manifest", &manifest, "--out", &replayed], dir);
        rep.check(ok, || format!("replay {}: {log}", args[0]));
        let a = std::fs::read(dir.join(out)).unwrap_or_default();
        let b = std::fs::read(dir.join(&replayed)).unwrap_or_default();
        rep.check(!a.is_empty() && a == b, || format!("{}: replay differs", args[0]));
    }
    rep.note("replay byte-identical for entropy, mutinfo, kl, curve, sample");

    let base = ["entropy", "--spec", "z.json", "--samples", "50000", "--seed", "9"];
    let outputs: Vec<String> = ["1", "3", "8"]
        .iter()
        .map(|t| {
            let mut args = vec!["--threads", t];
            args.extend(base);
            run_cli(&args, dir).1
        })
        .collect();
    rep.check(outputs.iter().all(|o| o == &outputs[0]), || {
        format!("CLI output varies with --threads: {outputs:?}")
    });

    let spec = DistributionSpec::lcfusn(
        DVector::from_column_slice(&[0.1, -0.2, 0.3]),
        DMatrix::identity(3, 3),
        DMatrix::from_row_slice(3, 2, &[0.5, 0.1, 0.2, -0.6, 0.3, 0.3]),
    )
    .unwrap();
    let s = mc_stream(10);
    let values: Vec<u64> = [1, 2, 5]
        .iter()
        .map(|&t| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            pool.install(|| entropy_mc(&spec, &s, 50_000).unwrap().value.to_bits())
        })
        .collect();
    rep.check(values.iter().all(|v| *v == values[0]), || {
        "entropy_mc varies with pool size".into()
    });
    rep.note("identical results with 1, 2, 5 (library) and 1, 3, 8 (CLI) threads");
    rep.finish();
}
