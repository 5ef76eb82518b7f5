//! Gauss-Legendre rules and the special functions behind the analytic tail
//! of oscillatory Fourier integrals.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// A rule mapped onto `[a, b]`, appended to `nodes`/`weights`.
pub fn push_panel(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    for (x, w) in rule.0.iter().zip(&rule.1) {
        nodes.push(c + h * x);
        weights.push(h * w);
    }
}

/// Generalized exponential integral `E_n(z) = int_1^inf e^{-z t} t^{-n} dt`
/// for `Re z >= 0` (the imaginary axis included when `n >= 2`).
pub fn expint(n: u32, z: Complex64) -> Complex64 {
    assert!(n >= 1, "expint order must be at least 1");
    if z.norm() == 0.0 {
        assert!(n >= 2, "E_1 diverges at zero");
        return Complex64::new(1.0 / (n - 1) as f64, 0.0);
    }
    if z.norm() >= 2.0 {
        expint_continued_fraction(n, z)
    } else {
        expint_series(n, z)
    }
}

fn expint_continued_fraction(n: u32, z: Complex64) -> Complex64 {
    let nf = n as f64;
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = z + nf;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (nf - 1.0 + i as f64);
        b += 2.0;
        d = an * d + b;
        if d.norm() == 0.0 {
            d = tiny;
        }
        d = 1.0 / d;
        c = b + an / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

fn expint_series(n: u32, z: Complex64) -> Complex64 {
    let nm1 = n as i64 - 1;
    let mut ans = if nm1 != 0 { Complex64::new(1.0 / nm1 as f64, 0.0) } else { -z.ln() - EULER_GAMMA };
    let mut fact = Complex64::new(1.0, 0.0);
    for i in 1..500i64 {
        fact *= -z / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|j| 1.0 / j as f64).sum::<f64>();
            fact * (-z.ln() + psi)
        };
        ans += del;
        if del.norm() < ans.norm() * 1e-17 {
            break;
        }
    }
    ans
}

/// `int_K^inf e^{i a k} k^{-p} dk` for `K > 0`, `p >= 2`.
pub fn oscillatory_tail(a: f64, p: u32, k0: f64) -> Complex64 {
    assert!(p >= 2 && k0 > 0.0);
    let scale = k0.powi(1 - p as i32);
    if a == 0.0 {
        return Complex64::new(scale / (p - 1) as f64, 0.0);
    }
    let v = scale * expint(p, Complex64::new(0.0, -a.abs() * k0));
    if a > 0.0 {
        v
    } else {
        v.conj()
    }
}
