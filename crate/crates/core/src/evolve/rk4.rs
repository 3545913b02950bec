use nalgebra::{ComplexField, DVector};

/// One classical fourth-order Runge–Kutta step of `dy/dt = f(t, y)`.
pub fn rk4_step<T, F>(f: &F, t: f64, y: &DVector<T>, h: f64) -> DVector<T>
where
    T: ComplexField<RealField = f64> + Copy,
    F: Fn(f64, &DVector<T>) -> DVector<T>,
{
    let half = T::from_real(h / 2.0);
    let k1 = f(t, y);
    let k2 = f(t + h / 2.0, &(y + &k1 * half));
    let k3 = f(t + h / 2.0, &(y + &k2 * half));
    let k4 = f(t + h, &(y + &k3 * T::from_real(h)));
    y + (k1 + (k2 + k3) * T::from_real(2.0) + k4) * T::from_real(h / 6.0)
}

/// Integrates from `t0` to `t1` in equal substeps no longer than `max_step`.
pub fn rk4_integrate<T, F>(f: &F, t0: f64, t1: f64, y: &DVector<T>, max_step: f64) -> DVector<T>
where
    T: ComplexField<RealField = f64> + Copy,
    F: Fn(f64, &DVector<T>) -> DVector<T>,
{
    let span = t1 - t0;
    if span <= 0.0 {
        return y.clone();
    }
    let n = (span / max_step - 1e-9).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut out = y.clone();
    for i in 0..n {
        out = rk4_step(f, t0 + i as f64 * h, &out, h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let f = |_t: f64, y: &DVector<f64>| -y;
        let y0 = DVector::from_element(1, 1.0);
        let err = |h: f64| (rk4_integrate(&f, 0.0, 1.0, &y0, h)[0] - (-1.0f64).exp()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn time_dependent_rhs() {
        let f = |t: f64, _y: &DVector<f64>| DVector::from_element(1, 3.0 * t * t);
        let y = rk4_integrate(&f, 0.0, 2.0, &DVector::from_element(1, 0.0), 0.5);
        assert!((y[0] - 8.0).abs() < 1e-12);
    }
}
