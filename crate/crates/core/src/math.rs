/// `a mod b` in `[0, b)` for `b > 0`.
pub(crate) fn rem_euclid(a: f64, b: f64) -> f64 {
    let r = a % b;
    if r < 0.0 {
        // a tiny negative remainder can round up to b itself
        let w = r + b;
        if w >= b {
            0.0
        } else {
            w
        }
    } else {
        r
    }
}
