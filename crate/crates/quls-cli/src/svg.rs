//! Minimal SVG scatter rendering for QQ panels: points on a square canvas
//! with a 45-degree reference line and axis labels. No styling knobs; the
//! output is meant for a quick visual adequacy check.

pub fn qq_panel(title: &str, pairs: &[(f64, f64)]) -> String {
    let (w, h, margin) = (420.0, 420.0, 45.0);
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let lo = xs
        .iter()
        .chain(&ys)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = xs
        .iter()
        .chain(&ys)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-9);
    let (lo, hi) = (lo - pad, hi + pad);
    let scale = (w - 2.0 * margin) / (hi - lo);
    let sx = |v: f64| margin + (v - lo) * scale;
    let sy = |v: f64| h - margin - (v - lo) * scale;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n",
        w / 2.0
    ));
    // Axes.
    s.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = margin,
        b = h - margin,
        r = w - margin,
        t = margin
    ));
    // Reference line.
    s.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n",
        sx(lo + pad),
        sy(lo + pad),
        sx(hi - pad),
        sy(hi - pad)
    ));
    for (x, y) in pairs {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.4\" fill=\"none\" stroke=\"#1f4e8c\"/>\n",
            sx(*x),
            sy(*y)
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\">theoretical quantile</text>\n",
        w / 2.0,
        h - 12.0
    ));
    s.push_str(&format!(
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\" transform=\"rotate(-90 14 {})\">empirical quantile</text>\n",
        h / 2.0,
        h / 2.0
    ));
    s.push_str("</svg>\n");
    s
}
