//! Randomized consistency checks of the posterior machinery against
//! independent computations. Shared by the `selftest` command and the
//! acceptance tests.

use rand::Rng;
use rcgp_ucb::gp::GpPosterior;
use rcgp_ucb::kernels::{KernelFamily, KernelSpec, Point};
use rcgp_ucb::rcgp::{deviation_schur, RcgpPosterior};
use rcgp_ucb::streams::{stream_rng, AUX};
use rcgp_ucb::weights::{c1_bound, cw_from_c1, Center, HalfWidth, PimqParams};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn detail(&self) -> String {
        format!(
            "{} cases, worst {:.3e} (tolerance {:.1e})",
            self.cases, self.worst, self.tolerance
        )
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail()
        )
    }
}

fn grid(n: usize) -> Vec<Point> {
    (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect()
}

fn random_kernel<R: Rng>(rng: &mut R) -> KernelSpec {
    let family = if rng.random_bool(0.5) {
        KernelFamily::Rbf
    } else {
        KernelFamily::Matern52
    };
    KernelSpec::new(
        family,
        vec![rng.random_range(0.05..0.5)],
        rng.random_range(0.5..2.0),
    )
    .expect("positive hyperparameters")
}

/// Robust and standard posteriors agree on data that sits inside the plateau.
pub fn plateau_equivalence(instances: usize, seed: u64) -> OracleReport {
    let tolerance = 1e-10;
    let at = grid(101);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let mut rng = stream_rng(seed, AUX, i as u64);
        let n = rng.random_range(1..=20);
        let kernel = random_kernel(&mut rng);
        let noise = rng.random_range(0.01..1.0);
        let l = rng.random_range(0.5..3.0);
        let xs: Vec<Point> = (0..n).map(|_| vec![rng.random::<f64>()]).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-l..=l)).collect();
        let params = PimqParams::fixed(noise, l, rng.random_range(0.1..2.0)).expect("valid");
        let gp = GpPosterior::fit(&xs, &ys, &kernel, noise).expect("gp fit");
        let rc = RcgpPosterior::fit(&xs, &ys, &kernel, params).expect("rcgp fit");
        for ((m1, v1), (m2, v2)) in gp
            .predict_many(&at)
            .expect("predict")
            .into_iter()
            .zip(rc.predict_many(&at).expect("predict"))
        {
            worst = worst.max((m1 - m2).abs()).max((v1 - v2).abs());
        }
    }
    OracleReport {
        name: "plateau equivalence",
        passed: worst < tolerance,
        cases: instances,
        worst,
        tolerance,
    }
}

struct DeviationInstance {
    kernel: KernelSpec,
    params: PimqParams,
    clean_x: Vec<Point>,
    clean_y: Vec<f64>,
    corrupt_x: Vec<Point>,
    corrupt_y: Vec<f64>,
}

fn deviation_instance(seed: u64, i: usize) -> DeviationInstance {
    let mut rng = stream_rng(seed, AUX, 10_000 + i as u64);
    let tc = rng.random_range(1..=4);
    let n_clean = rng.random_range(1..=10 - tc);
    let kernel = random_kernel(&mut rng);
    let noise = rng.random_range(0.05..1.0);
    let l = rng.random_range(0.5..3.0);
    let c = rng.random_range(0.2..2.0);
    let clean_x = (0..n_clean).map(|_| vec![rng.random::<f64>()]).collect();
    let clean_y = (0..n_clean).map(|_| rng.random_range(-l..=l)).collect();
    let corrupt_x = (0..tc).map(|_| vec![rng.random::<f64>()]).collect();
    let corrupt_y = (0..tc)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * rng.random_range(0.0..60.0)
        })
        .collect();
    DeviationInstance {
        kernel,
        params: PimqParams::fixed(noise, l, c).expect("valid"),
        clean_x,
        clean_y,
        corrupt_x,
        corrupt_y,
    }
}

/// The Schur-complement deviation equals the direct difference of posterior means.
pub fn deviation_formula(instances: usize, seed: u64) -> OracleReport {
    let tolerance = 1e-8;
    let at = grid(101);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let d = deviation_instance(seed, i);
        let dev = deviation_schur(
            (&d.clean_x, &d.clean_y),
            (&d.corrupt_x, &d.corrupt_y),
            &d.kernel,
            &d.params,
            &at,
        )
        .expect("schur");
        let mut all_x = d.clean_x.clone();
        all_x.extend(d.corrupt_x.iter().cloned());
        let mut all_y = d.clean_y.clone();
        all_y.extend(&d.corrupt_y);
        let full = RcgpPosterior::fit(&all_x, &all_y, &d.kernel, d.params.clone()).expect("fit");
        let uc =
            GpPosterior::fit(&d.clean_x, &d.clean_y, &d.kernel, d.params.noise_var()).expect("fit");
        for (x, v) in at.iter().zip(dev) {
            let direct = full.mean(x).expect("mean") - uc.mean(x).expect("mean");
            worst = worst.max((direct - v).abs());
        }
    }
    OracleReport {
        name: "deviation formula",
        passed: worst < tolerance,
        cases: instances,
        worst,
        tolerance,
    }
}

/// `|mu_R - mu_uc| <= C_w sqrt(T_c) sigma_uc` with `C_w` from the closed-form `C_1` bound.
/// `worst` is the largest excess of the left side over the right side.
pub fn deviation_bound(instances: usize, seed: u64) -> OracleReport {
    let tolerance = 1e-9;
    let at = grid(101);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for i in 0..instances {
        let d = deviation_instance(seed, i);
        let noise = d.params.noise_var();
        let uc = GpPosterior::fit(&d.clean_x, &d.clean_y, &d.kernel, noise).expect("fit");
        // g = 0, so Delta(x) = |mu_uc(x)|; include the corrupted inputs themselves
        let mut probe = at.clone();
        probe.extend(d.corrupt_x.iter().cloned());
        let sup_delta = probe
            .iter()
            .map(|x| uc.mean(x).expect("mean").abs())
            .fold(0.0, f64::max);
        let l = d.params.half_width().eval(&[0.0]);
        let cw = cw_from_c1(c1_bound(noise, l, d.params.shape(), sup_delta), noise);
        let tc = d.corrupt_x.len() as f64;
        let dev = deviation_schur(
            (&d.clean_x, &d.clean_y),
            (&d.corrupt_x, &d.corrupt_y),
            &d.kernel,
            &d.params,
            &at,
        )
        .expect("schur");
        for (x, v) in at.iter().zip(dev) {
            let (_, var) = uc.predict(x).expect("predict");
            let excess = v.abs() - cw * tc.sqrt() * var.sqrt();
            worst = worst.max(excess);
            if excess > tolerance {
                violations += 1;
            }
        }
    }
    OracleReport {
        name: "deviation bound",
        passed: violations == 0,
        cases: instances,
        worst,
        tolerance,
    }
}

/// Closed-form `m_w` against `sigma^2` times a central difference of `log w^2`.
pub fn mw_gradient(draws: usize, seed: u64) -> OracleReport {
    let tolerance = 1e-5;
    let h = 1e-6;
    let mut rng = stream_rng(seed, AUX, 20_000);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let l = rng.random_range(0.0..3.0);
        let c = rng.random_range(0.1..3.0);
        let noise = rng.random_range(0.1..2.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let y = sign * (l + rng.random_range(0.01..10.0));
        let p = PimqParams::fixed(noise, l, c).expect("valid");
        let lw2 = |y: f64| 2.0 * p.weight(&[0.0], y).ln();
        let fd = noise * (lw2(y + h) - lw2(y - h)) / (2.0 * h);
        let exact = p.mean_correction(&[0.0], y);
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    OracleReport {
        name: "m_w gradient check",
        passed: worst < tolerance,
        cases: draws,
        worst,
        tolerance,
    }
}

/// Measured `sup |w (y - m_w - mu_uc)|` never exceeds the closed-form `C_1` bound.
/// `worst` is the largest ratio of measured supremum to bound.
pub fn c1_domination(instances: usize, seed: u64) -> OracleReport {
    let tolerance = 1e-9;
    let xs_grid = grid(101);
    let mut worst: f64 = 0.0;
    let mut passed = true;
    for i in 0..instances {
        let mut rng = stream_rng(seed, AUX, 30_000 + i as u64);
        let kernel = random_kernel(&mut rng);
        let noise = rng.random_range(0.05..2.0);
        let n = rng.random_range(2..=10);
        let xs: Vec<Point> = (0..n).map(|_| vec![rng.random::<f64>()]).collect();
        let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let uc = GpPosterior::fit(&xs, &ys, &kernel, noise).expect("fit");
        let (amp, freq) = (rng.random_range(0.0..1.5), rng.random_range(1.0..10.0));
        let l = rng.random_range(0.0..3.0);
        let c = rng.random_range(0.1..3.0);
        let center = Center::function(move |x| amp * (freq * x[0]).sin());
        let params = PimqParams::new(noise, center.clone(), HalfWidth::Fixed(l), c).expect("valid");

        let mu: Vec<f64> = xs_grid.iter().map(|x| uc.mean(x).expect("mean")).collect();
        let sup_delta = xs_grid
            .iter()
            .zip(&mu)
            .map(|(x, m)| (center.eval(x) - m).abs())
            .fold(0.0, f64::max);
        let bound = c1_bound(noise, l, c, sup_delta);

        let mut measured: f64 = 0.0;
        for (x, m) in xs_grid.iter().zip(&mu) {
            let g = center.eval(x);
            // dense in the residual, with extra resolution around the plateau edges
            let offsets = (0..=4000)
                .map(|k| -100.0 + 0.05 * k as f64)
                .chain((0..=400).map(|k| l + c * c / l.max(1e-3) - 2.0 + 0.01 * k as f64))
                .chain((0..=400).map(|k| -(l + c * c / l.max(1e-3)) - 2.0 + 0.01 * k as f64));
            for r in offsets {
                let y = g + r;
                let w = params.weight(x, y);
                let mw = params.mean_correction(x, y);
                measured = measured.max((w * (y - mw - m)).abs());
            }
        }
        worst = worst.max(measured / bound);
        passed &= measured <= bound + tolerance;
    }
    OracleReport {
        name: "C_1 domination",
        passed,
        cases: instances,
        worst,
        tolerance,
    }
}

/// The fast oracle suite run by `selftest`.
pub fn all(seed: u64) -> Vec<OracleReport> {
    vec![
        plateau_equivalence(200, seed),
        deviation_formula(200, seed),
        deviation_bound(200, seed),
        mw_gradient(1000, seed),
        c1_domination(50, seed),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        assert!(plateau_equivalence(10, 1).passed);
        assert!(deviation_formula(10, 1).passed);
        assert!(deviation_bound(10, 1).passed);
        assert!(mw_gradient(50, 1).passed);
        assert!(c1_domination(3, 1).passed);
    }
}
