/// Nelder–Mead maximisation of `f` in two dimensions. Returns the best vertex.
pub(crate) fn nelder_mead_max<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], step: f64, iters: usize) -> [f64; 2] {
    let eval = |p: [f64; 2]| {
        let v = f(p);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let mut pts = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut vals = pts.map(eval);
    for _ in 0..iters {
        // best first
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        pts = idx.map(|i| pts[i]);
        vals = idx.map(|i| vals[i]);
        if (vals[0] - vals[2]).abs() < 1e-14 * (1.0 + vals[0].abs()) && dist(pts[0], pts[2]) < 1e-12 {
            break;
        }
        let c = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])];
        let refl = along(-1.0);
        let fr = eval(refl);
        if fr > vals[0] {
            let exp = along(-2.0);
            let fe = eval(exp);
            if fe > fr {
                pts[2] = exp;
                vals[2] = fe;
            } else {
                pts[2] = refl;
                vals[2] = fr;
            }
        } else if fr > vals[1] {
            pts[2] = refl;
            vals[2] = fr;
        } else {
            let con = if fr > vals[2] { along(-0.5) } else { along(0.5) };
            let fc = eval(con);
            if fc > vals[2].max(fr) {
                pts[2] = con;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = [(pts[0][0] + pts[k][0]) / 2.0, (pts[0][1] + pts[k][1]) / 2.0];
                    vals[k] = eval(pts[k]);
                }
            }
        }
    }
    let best = (0..3).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    pts[best]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}
