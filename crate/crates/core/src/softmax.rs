/// Writes `total · softmax(gain · input)` into `out`, subtracting the
/// maximum exponent first so that large gains cannot overflow.
pub(crate) fn scaled_softmax(input: &[f64], gain: f64, total: f64, out: &mut [f64]) {
    debug_assert_eq!(input.len(), out.len());
    let max = input
        .iter()
        .map(|&s| gain * s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &s) in out.iter_mut().zip(input) {
        let e = (gain * s - max).exp();
        *o = e;
        sum += e;
    }
    let norm = total / sum;
    for o in out.iter_mut() {
        *o *= norm;
    }
}

/// Posterior weight of the first entry when the statistic is
/// `b·(U_1 + b)` for the true column and `b·U_j` for the others:
/// `e^{b(U_1+b)} / (e^{b(U_1+b)} + Σ_{j≥2} e^{b U_j})`.
pub(crate) fn first_entry_weight(b: f64, u: &[f64]) -> f64 {
    let true_exp = b * (u[0] + b);
    let max = u[1..].iter().map(|&x| b * x).fold(true_exp, f64::max);
    let num = (true_exp - max).exp();
    let rest: f64 = u[1..].iter().map(|&x| (b * x - max).exp()).sum();
    num / (num + rest)
}
