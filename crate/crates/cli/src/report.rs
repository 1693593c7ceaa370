use std::fmt::Write;

use ncbounds::bounds::BoundPair;
use ncbounds::pipeline::AnalysisReport;

use crate::output::num;

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "-".into())
}

fn pair(out: &mut String, name: &str, b: &BoundPair) {
    let _ = writeln!(
        out,
        "{name:<16} lower {} (clamped {}{})  upper {} (clamped {}{})",
        num(b.lower),
        num(b.lower_clamped),
        if b.lower_vacuous { ", vacuous" } else { "" },
        num(b.upper),
        num(b.upper_clamped),
        if b.upper_vacuous { ", vacuous" } else { "" },
    );
}

pub fn render(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let s = &r.stats;
    let _ = writeln!(out, "system           {} branches in dimension {}", s.branch_count(), s.dim);
    for (i, (sv, jg)) in s.per_branch_singular_values.iter().zip(&s.per_branch_jacobian).enumerate() {
        let sv: Vec<String> = sv.iter().map(|x| num(*x)).collect();
        let _ = writeln!(out, "  {:<14} singular values {}  Jg {}", r.system.branch_name(i), sv.join(" "), num(*jg));
    }
    let _ = writeln!(
        out,
        "norms            |Dg| {}  min Jg {}  |Df| {}  inf Jf {}  sup Jf {}",
        num(s.norm_dg),
        num(s.min_jg),
        num(s.norm_df),
        num(s.inf_jf),
        num(s.sup_jf)
    );
    let v = &r.validation;
    let _ = writeln!(
        out,
        "validation       open {}  border {}  regular {}  border gap {}  min separation {}",
        v.open_condition,
        v.border_condition,
        v.regular,
        num(v.border_gap),
        num(v.min_separation)
    );
    match r.delta_thresholds {
        Some(th) => {
            let _ = writeln!(out, "thresholds       delta0 {}  delta1 {}", num(th.delta0), num(th.delta1));
        }
        None => {
            let _ = writeln!(out, "thresholds       Conformal (no delta0)");
        }
    }
    let _ = writeln!(
        out,
        "parameters       delta {}  rho {}  boxdim estimate {}",
        num(r.params.delta),
        num(r.params.rho),
        opt(r.params.boxdim_estimate)
    );
    let _ = writeln!(out, "epsilon          {}  log epsilon {}", num(r.epsilon), num(r.log_epsilon));
    let _ = writeln!(out, "N0               {}", opt(r.n0));
    let l = &r.lambdas;
    let _ = writeln!(
        out,
        "lambdas          lambda0 {}  lambda1 {}  lambda2 {}",
        num(l.lambda0),
        num(l.lambda1),
        num(l.lambda2)
    );
    let _ = writeln!(out, "alpha            {}", num(r.alpha0));
    pair(&mut out, "box", &r.box_bounds);
    match r.sigma_interval {
        Some(si) => {
            let _ = writeln!(
                out,
                "sigma interval   [{}, {}]  boxdim used {}",
                num(si.lower),
                num(si.upper),
                opt(r.sigma_boxdim)
            );
        }
        None => {
            let _ = writeln!(out, "sigma interval   skipped");
        }
    }
    if r.sigma_overrides.lower.is_some() || r.sigma_overrides.upper.is_some() {
        let _ = writeln!(
            out,
            "sigma override   lower {}  upper {}",
            opt(r.sigma_overrides.lower),
            opt(r.sigma_overrides.upper)
        );
    }
    match &r.hausdorff {
        Some(h) => {
            let _ = writeln!(
                out,
                "shifted roots    alpha_bar {} (sigma {})  alpha_underbar {} (sigma {})",
                num(h.alpha_bar),
                num(h.sigma_lower_used),
                num(h.alpha_underbar),
                num(h.sigma_upper_used)
            );
            pair(&mut out, "hausdorff", &h.bounds);
        }
        None => {
            let _ = writeln!(out, "hausdorff        skipped");
        }
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
