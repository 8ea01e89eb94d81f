//! Fourth-order Runge-Kutta integration of the concentration dynamics
//! `V dN/dt = n - rN` (host present) and `V dN/dt = -rN` (host gone), with the
//! dose accumulating as `q N` while the neighbor is present.

pub struct Oracle {
    pub n: f64,
    pub q: f64,
    pub r: f64,
    pub v: f64,
}

impl Oracle {
    fn rhs(&self, t: f64, t_a: f64, conc: f64) -> f64 {
        let source = if t < t_a { self.n } else { 0.0 };
        (source - self.r * conc) / self.v
    }

    /// Concentration at `t1` from `conc` at `t0`, plus `q * integral N` over the
    /// piece when `inhaling`. Pieces never straddle `t_a`.
    fn piece(&self, t0: f64, t1: f64, t_a: f64, conc: f64, inhaling: bool, h: f64) -> (f64, f64) {
        if t1 <= t0 {
            return (conc, 0.0);
        }
        let steps = ((t1 - t0) / h).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / steps as f64;
        let mid = 0.5 * (t0 + t1);
        let f = |c: f64| self.rhs(mid, t_a, c);
        let (mut c, mut dose) = (conc, 0.0);
        for _ in 0..steps {
            let k1 = f(c);
            let k2 = f(c + 0.5 * dt * k1);
            let k3 = f(c + 0.5 * dt * k2);
            let k4 = f(c + dt * k3);
            // The dose integrand is q*c, so its RK4 increments reuse the stage values.
            if inhaling {
                let c2 = c + 0.5 * dt * k1;
                let c3 = c + 0.5 * dt * k2;
                let c4 = c + dt * k3;
                dose += self.q * dt / 6.0 * (c + 2.0 * c2 + 2.0 * c3 + c4);
            }
            c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        (c, dose)
    }

    /// (direct, indirect) doses for a link, integrated with step `h`.
    pub fn doses(&self, t_a: f64, t_c: f64, t_d: f64, h: f64) -> (f64, f64) {
        let end = t_c + t_d;
        let mut cuts = [0.0, t_a, t_c, end];
        cuts.sort_by(f64::total_cmp);
        let (mut conc, mut direct, mut indirect) = (0.0, 0.0, 0.0);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let inhaling = a >= t_c && b <= end;
            let (c, dose) = self.piece(a, b, t_a, conc, inhaling, h);
            conc = c;
            if b <= t_a {
                direct += dose;
            } else {
                indirect += dose;
            }
        }
        (direct, indirect)
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Integration step fine enough for the closed forms to be checked at 1e-6.
pub fn step_for(r: f64, v: f64) -> f64 {
    (1e-3 * v / r).min(1e-2)
}
