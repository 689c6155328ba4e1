//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use weightkit::analysis::{parse_spec, render_json, run_analysis};
use weightkit::conditions::{
    admissibility_bundle, beta_gamma, equlemma_check, matrix_mg, mg_battery, mg_double_profile,
    mg_sum_profile, moderate_growth_index, quotient_double_profile, quotient_root_comparison,
    root_profile,
};
use weightkit::counterexample::{
    build_counterexample, validate_schedule, witness_divergence, PiecewiseLinearLogSpec,
    ScheduleVariant,
};
use weightkit::matrix::{
    build_associated_matrix, doubling_index_mg_check, dyadic_grid, omega_sandwich_check,
    shift_quotient_check, WeightMatrix,
};
use weightkit::report::{ConditionId, ConditionReport, MatrixVariant, MgLevel, Verdict};
use weightkit::sequence::{make_family, Family, WeightSequence};
use weightkit::{condv_propagation, young_conjugate_oracle, AssociatedFunction, WeightFunction};

type Outcome = Result<Vec<String>, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

const ROUMIEU: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
const BEURLING: [f64; 4] = [0.25, 1.0 / 3.0, 0.5, 1.0];

/// `double_exp` overflows the representable range shortly after p = 690.
const DOUBLE_EXP_MAX: usize = 512;

fn family(f: Family, horizon: usize) -> WeightSequence {
    let h = if f == Family::DoubleExp {
        horizon.min(DOUBLE_EXP_MAX)
    } else {
        horizon
    };
    make_family(f, h).expect("family builds")
}

fn counterexample(levels: usize, v: ScheduleVariant) -> (PiecewiseLinearLogSpec, WeightSequence) {
    build_counterexample(levels, &[v], 1.0).expect("counterexample builds")
}

const FAMILIES: [Family; 5] = [
    Family::Gevrey { s: 1.0 },
    Family::Gevrey { s: 2.0 },
    Family::QGevrey { q: 2.0, n: 2 },
    Family::QGevrey { q: 3.0, n: 3 },
    Family::DoubleExp,
];

fn battery(horizon: usize) -> Vec<WeightSequence> {
    let mut v: Vec<WeightSequence> = FAMILIES.iter().map(|&f| family(f, horizon)).collect();
    v.push(counterexample(8, ScheduleVariant::Minimal).1);
    v
}

fn omega(m: &WeightSequence) -> WeightFunction {
    WeightFunction::associated(m.clone()).expect("LC input")
}

fn reduction_matrix(m: &WeightSequence, variant: MatrixVariant) -> Result<WeightMatrix, String> {
    let w = omega(m);
    match variant {
        MatrixVariant::Roumieu => e(build_associated_matrix(&w, &ROUMIEU, m.horizon() / 4)),
        MatrixVariant::Beurling => e(build_associated_matrix(&w, &BEURLING, m.horizon())),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Running maximum of `profile[1..=p]` at the first index of every level
/// `l >= first_level` of `spec` that fits below `end`.
fn level_maxima(
    spec: &PiecewiseLinearLogSpec,
    profile: &[f64],
    end: usize,
    first_level: usize,
) -> Vec<f64> {
    (first_level..=spec.levels())
        .map(|l| spec.a(l) as usize + 1)
        .filter(|&p| p <= end)
        .map(|p| {
            profile[1..=p]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0])
}

fn criterion_1() -> Outcome {
    let mut lines = Vec::new();
    for m in battery(512) {
        let a = e(AssociatedFunction::new(m.clone()))?;
        let h = m.horizon();
        let y_max = a.max_log_t();
        let mut worst_int = 0.0f64;
        for k in 1..=100 {
            let y = y_max * k as f64 / 100.0;
            let direct = e(a.omega_at_log(y))?;
            let integral = e(a.omega_integral_at_log(y))?;
            worst_int = worst_int.max(rel(direct, integral));
        }
        ensure(worst_int <= 1e-9, || {
            format!("{}: omega vs integral form {worst_int:e}", m.label())
        })?;
        for p in 0..=h {
            let v = e(a.young_conjugate(p as f64))?;
            ensure(v == m.log_value(p), || {
                format!("{}: conjugate at {p} is {v}", m.label())
            })?;
        }
        let mut worst_rec = 0.0f64;
        for p in 0..=128.min(h / 2) {
            worst_rec = worst_rec.max(rel(e(a.reconstruct_sequence(p))?, m.log_value(p)));
        }
        ensure(worst_rec <= 1e-9, || {
            format!("{}: reconstruction {worst_rec:e}", m.label())
        })?;
        let mat = e(build_associated_matrix(&omega(&m), &ROUMIEU, h / 4))?;
        let mut worst_mat = 0.0f64;
        for (l, member) in mat.indices().iter().zip(mat.members()) {
            let li = *l as usize;
            for p in 0..=mat.horizon() {
                worst_mat = worst_mat.max(rel(member.log_value(p), m.log_value(li * p) / *l));
            }
        }
        ensure(worst_mat <= 1e-10, || {
            format!("{}: integer-index identity {worst_mat:e}", m.label())
        })?;
        lines.push(format!(
            "{}: integral {worst_int:.1e}, reconstruct {worst_rec:.1e}, matrix {worst_mat:.1e}",
            m.label()
        ));
    }
    Ok(lines)
}

fn criterion_2() -> Outcome {
    let mut lines = Vec::new();
    for m in battery(512) {
        let w = omega(&m);
        let h = m.horizon() as f64;
        let mut worst = 0.0f64;
        for k in 0..50 {
            // 50 non-integer points spread over (0, P)
            let x = ((k as f64 + 0.5) / 50.0 * (h - 1.0)).floor() + 0.37 + 0.01 * (k % 7) as f64;
            let fast = e(w.conjugate(x))?;
            let oracle = e(young_conjugate_oracle(&w, x, 512))?;
            worst = worst.max((fast - oracle).abs() / oracle.abs().max(1.0));
        }
        ensure(worst <= 1e-6, || {
            format!("{}: conjugate vs oracle {worst:e}", m.label())
        })?;
        lines.push(format!("{}: conjugate vs oracle {worst:.1e}", m.label()));
    }
    let w2 = e(WeightFunction::log_power(2.0))?;
    let mut worst = 0.0f64;
    for k in 0..50 {
        let x = 0.1 + 1.7 * k as f64;
        worst = worst.max(rel(e(w2.conjugate(x))?, x * x / 4.0));
        worst = worst.max(rel(e(young_conjugate_oracle(&w2, x, 512))?, x * x / 4.0));
    }
    ensure(worst <= 1e-6, || format!("omega_2 closed form {worst:e}"))?;
    let mat = e(build_associated_matrix(&w2, &dyadic_grid(), 64))?;
    let mut worst_q = 0.0f64;
    for (l, member) in mat.indices().iter().zip(mat.members()) {
        // q-Gevrey with q = e^{l/4}: log M_p = p^2 l / 4
        for p in 0..=64 {
            let pf = p as f64;
            worst_q = worst_q.max((member.log_value(p) - pf * pf * l / 4.0).abs());
        }
    }
    ensure(worst_q <= 1e-9, || {
        format!("omega_2 members vs q-Gevrey {worst_q:e}")
    })?;
    lines.push(format!(
        "omega_2: closed form {worst:.1e}, members vs q-Gevrey {worst_q:.1e}"
    ));
    Ok(lines)
}

fn dyadic_matrices() -> Result<Vec<WeightMatrix>, String> {
    let mut out = vec![e(build_associated_matrix(
        &e(WeightFunction::log_power(2.0))?,
        &dyadic_grid(),
        256,
    ))?];
    for m in battery(4096) {
        out.push(e(build_associated_matrix(
            &omega(&m),
            &dyadic_grid(),
            m.horizon() / 16,
        ))?);
    }
    Ok(out)
}

fn criterion_3() -> Outcome {
    let mut lines = Vec::new();
    for mat in dyadic_matrices()? {
        let label = mat.weight().map_or_else(String::new, |w| w.label());
        let mg = doubling_index_mg_check(&mat, 64);
        let slack = mg.constant("max_excess").unwrap_or(f64::NAN);
        ensure(mg.verdict.holds() && slack <= 1e-9, || {
            format!("{label}: doubling-index mg excess {slack:e}")
        })?;
        let sw = e(omega_sandwich_check(&mat, 200))?;
        let d_max = sw
            .constants
            .iter()
            .filter(|(k, _)| k.starts_with("D@"))
            .map(|(_, v)| *v)
            .fold(0.0, f64::max);
        ensure(sw.verdict.holds() && d_max.is_finite(), || {
            format!("{label}: sandwich {:?}", sw.constants)
        })?;
        let sh = e(shift_quotient_check(&mat))?;
        ensure(sh.verdict.holds(), || {
            format!("{label}: shifted-quotient bound {:?}", sh.constants)
        })?;
        lines.push(format!(
            "{label} (horizon {}): mg excess {slack:.1e}, max D_l {d_max:.3}, shift check p <= {}",
            mat.horizon(),
            mat.horizon() / 4
        ));
    }
    Ok(lines)
}

fn integer_item_profiles(m: &WeightSequence) -> Vec<(ConditionId, Vec<f64>, usize)> {
    let h = m.horizon();
    vec![
        (ConditionId::MgI, mg_sum_profile(m, m), h),
        (ConditionId::MgII, mg_double_profile(m, m), h / 2),
        (ConditionId::MgIII, quotient_double_profile(m, m), h / 2),
        (ConditionId::MgVI, root_profile(m, m, 1), h),
    ]
}

fn series_values(r: &ConditionReport) -> Vec<f64> {
    r.witness_series.iter().map(|&(_, v)| v).collect()
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    let members: Vec<WeightSequence> = FAMILIES
        .iter()
        .map(|&f| match f {
            Family::Gevrey { .. } => family(f, 4096),
            _ => family(f, 512),
        })
        .collect();
    for m in &members {
        let b = e(mg_battery(m))?;
        let coincide = &b[&ConditionId::MgCoincide];
        ensure(coincide.verdict.holds(), || {
            format!("{}: items disagree {:?}", m.label(), coincide.notes)
        })?;
        let v = b[&ConditionId::MgI].verdict;
        match m.label() {
            l if l.starts_with("gevrey(1)") => {
                let c = b[&ConditionId::MgI].constant("C").unwrap_or(f64::NAN);
                ensure(v.holds() && c <= 2.0 + 1e-9, || {
                    format!("gevrey(1): {v}, C = {c}")
                })?;
                lines.push(format!("{}: all six hold, item (i) C = {c:.6}", m.label()));
            }
            l if l.starts_with("q_gevrey") => {
                ensure(v.fails(), || format!("{l}: {v}"))?;
                for (id, r) in b.iter().filter(|(id, _)| **id != ConditionId::MgCoincide) {
                    ensure(strictly_increasing(&series_values(r)), || {
                        format!("{l} {id}: series not increasing")
                    })?;
                }
                lines.push(format!(
                    "{l}: all six fail, witness series strictly increasing"
                ));
            }
            l => lines.push(format!("{l}: all six {v}")),
        }
    }
    let (spec, n) = counterexample(8, ScheduleVariant::Minimal);
    let b = e(mg_battery(&n))?;
    ensure(b[&ConditionId::MgCoincide].verdict.holds(), || {
        format!("N: items disagree {:?}", b[&ConditionId::MgCoincide].notes)
    })?;
    ensure(b[&ConditionId::MgI].verdict.fails(), || {
        "N: battery does not fail".into()
    })?;
    // The integer-indexed series are flat inside a level, so they are read at
    // level starts; levels 1 and 2 are the fixed initial segment a = 0, 1.
    for (id, profile, end) in integer_item_profiles(&n) {
        let lv = level_maxima(&spec, &profile, end, 3);
        ensure(strictly_increasing(&lv), || {
            format!("N {id}: level maxima {lv:?}")
        })?;
    }
    for id in [ConditionId::MgIV, ConditionId::MgV] {
        let s = series_values(&b[&id]);
        ensure(strictly_increasing(&s), || format!("N {id}: series {s:?}"))?;
    }
    lines.push(format!(
        "{}: all six fail, strictly increasing at level starts",
        n.label()
    ));
    Ok(lines)
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for m in battery(512) {
        let r = e(quotient_root_comparison(
            &reduction_matrix(&m, MatrixVariant::Roumieu)?,
            MatrixVariant::Roumieu,
        ))?;
        let b = e(quotient_root_comparison(
            &reduction_matrix(&m, MatrixVariant::Beurling)?,
            MatrixVariant::Beurling,
        ))?;
        let idx = e(moderate_growth_index(&m, 8))?;
        let g = idx.constant("g").unwrap_or(f64::NAN);
        let finite = g.is_finite();
        ensure(
            r.verdict.holds() == finite && b.verdict.holds() == finite && r.verdict == b.verdict,
            || format!("{}: R {} B {} g {g}", m.label(), r.verdict, b.verdict),
        )?;
        let expected = match m.label() {
            "gevrey(1)" => Some(1.0),
            "q_gevrey(2,2)" => Some(2.0),
            "double_exp" => Some(2.0),
            _ => None,
        };
        if let Some(want) = expected {
            ensure(g == want, || {
                format!("{}: g = {g}, expected {want}", m.label())
            })?;
        }
        if m.label() == "double_exp" {
            let prof = root_profile(&m, &m, 2);
            let plateau = prof[2..]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max)
                .exp();
            ensure(plateau <= 1.0 + 1e-6, || {
                format!("double_exp: A_min plateau {plateau}")
            })?;
        }
        lines.push(format!(
            "{}: R {}, B {}, g = {g}",
            m.label(),
            r.verdict,
            b.verdict
        ));
    }
    Ok(lines)
}

fn criterion_6() -> Outcome {
    let (spec, n) = counterexample(8, ScheduleVariant::Minimal);
    ensure(n.validate_lc().verdict.holds(), || "N is not in LC".into())?;
    ensure(validate_schedule(&spec).verdict.holds(), || {
        "schedule invalid".into()
    })?;
    let mut lines = Vec::new();
    for d in 2..=8usize {
        match witness_divergence(&spec, &n, d) {
            Ok(values) => {
                for (k, v) in values.iter().enumerate() {
                    let l = (d + k) as f64;
                    let want = l * l / d as f64;
                    ensure((v - want).abs() <= 1e-9, || {
                        format!("d = {d}, l = {l}: {v} vs {want}")
                    })?;
                }
                ensure(values.len() < 2 || strictly_increasing(&values), || {
                    format!("d = {d}: not increasing")
                })?;
                lines.push(format!("d = {d}: witness divergence = l^2/d on l = {d}..7"));
            }
            Err(err) => lines.push(format!("d = {d}: vacuous at 8 levels ({err})")),
        }
    }
    let idx = e(moderate_growth_index(&n, 8))?;
    ensure(idx.constant("g") == Some(f64::INFINITY), || {
        format!("g = {:?}", idx.constant("g"))
    })?;
    for (k, sub) in idx.sub_reports.iter().enumerate() {
        let d = k + 1;
        ensure(sub.verdict.fails(), || format!("d = {d}: {}", sub.verdict))?;
        let profile = root_profile(&n, &n, d);
        let lv = level_maxima(&spec, &profile, profile.len() - 1, d.max(2));
        ensure(lv.windows(2).all(|w| w[1] - w[0] >= 1.0), || {
            format!("d = {d}: level maxima {lv:?}")
        })?;
    }
    lines.push(
        "moderate growth index: every d <= 8 fails, log A_min grows by >= 1 per level from level d"
            .into(),
    );
    Ok(lines)
}

fn criterion_7() -> Outcome {
    let (_, n) = counterexample(8, ScheduleVariant::Minimal);
    let p2 = e(n.pi_transform(2.0))?;
    let bg = e(beta_gamma(&p2, 2, 1.0))?;
    let b1 = &bg[&ConditionId::Beta1];
    let est = b1.constant("log_liminf").unwrap_or(f64::NAN).exp();
    ensure(b1.verdict.holds() && est >= 4.0 - 1e-6, || {
        format!("pi^2(N): beta1 {} estimate {est}", b1.verdict)
    })?;

    let (qs, _) = counterexample(8, ScheduleVariant::Quasianalytic);
    let harmonic: f64 = (1..8).map(|j| 1.0 / j as f64).sum();
    let sum = qs.reciprocal_slope_sum();
    ensure(sum >= harmonic, || {
        format!("quasianalytic block sum {sum} < {harmonic}")
    })?;

    let (_, sb) = counterexample(9, ScheduleVariant::StrongB);
    for d in 1..=8 {
        let r = e(equlemma_check(&sb, d, false))?;
        ensure(r.sub_reports.iter().all(|s| s.verdict.fails()), || {
            format!(
                "strong_b d = {d}: {:?}",
                r.sub_reports.iter().map(|s| s.verdict).collect::<Vec<_>>()
            )
        })?;
    }
    Ok(vec![
        format!("pi^2(N), Q = 2: liminf estimate {est:.9}, beta1 holds"),
        format!("quasianalytic: block sum {sum:.3} >= harmonic {harmonic:.3}"),
        format!(
            "strong_b (9 levels, horizon {}): equlemma fails for d <= 8, C in 1,2,4,8",
            sb.horizon()
        ),
    ])
}

fn criterion_8() -> Outcome {
    let (_, n) = counterexample(8, ScheduleVariant::Minimal);
    let w2 = e(WeightFunction::log_power(2.0))?;
    let mut lines = Vec::new();
    let mut cases = Vec::new();
    for variant in [MatrixVariant::Roumieu, MatrixVariant::Beurling] {
        cases.push((
            n.label().to_string(),
            variant,
            reduction_matrix(&n, variant)?,
        ));
        let grid: &[f64] = if variant == MatrixVariant::Roumieu {
            &ROUMIEU
        } else {
            &BEURLING
        };
        cases.push((
            "omega_2".to_string(),
            variant,
            e(build_associated_matrix(&w2, grid, 256))?,
        ));
    }
    for (label, variant, mat) in &cases {
        for level in MgLevel::ALL {
            let r = e(matrix_mg(mat, *variant, level))?;
            ensure(r.verdict.holds(), || {
                format!("{label} {} {}: {}", variant.tag(), level.tag(), r.verdict)
            })?;
        }
        lines.push(format!(
            "{label} {}: matrix mg levels I-V hold",
            variant.tag()
        ));
    }
    for (label, variant, mat) in cases.iter().filter(|c| c.0 == n.label()) {
        let q = e(quotient_root_comparison(mat, *variant))?;
        ensure(q.verdict.fails(), || {
            format!(
                "{label} {}: quotient/root comparison {}",
                variant.tag(),
                q.verdict
            )
        })?;
        lines.push(format!(
            "{label} {}: quotient/root comparison fails",
            variant.tag()
        ));
    }
    Ok(lines)
}

fn criterion_9() -> Outcome {
    let w2 = e(WeightFunction::log_power(2.0))?;
    let mat = e(build_associated_matrix(&w2, &dyadic_grid(), 64))?;
    let cp = e(condv_propagation(&mat, 1.0, 2, 2, 1.0))?;
    let residual = cp.sub_reports[3]
        .constant("max_residual")
        .unwrap_or(f64::NAN);
    ensure(residual <= 1e-9, || {
        format!("quotient identity residual {residual:e}")
    })?;
    ensure(cp.verdict.holds(), || {
        format!(
            "propagation: {:?}",
            cp.sub_reports.iter().map(|s| s.verdict).collect::<Vec<_>>()
        )
    })?;
    let mut lines = vec![format!(
        "omega_2 propagation holds, identity residual {residual:.1e}"
    )];
    let (_, n) = counterexample(8, ScheduleVariant::Minimal);
    for (m, want) in [
        (
            family(Family::QGevrey { q: 2.0, n: 2 }, 512),
            Verdict::HoldsOnHorizon,
        ),
        (
            family(Family::Gevrey { s: 1.0 }, 512),
            Verdict::FailsOnHorizon,
        ),
        (n, Verdict::FailsOnHorizon),
    ] {
        let a = e(admissibility_bundle(&m))?;
        ensure(a.verdict == want, || {
            format!("{}: admissibility {} expected {want}", m.label(), a.verdict)
        })?;
        lines.push(format!("{}: admissibility {}", m.label(), a.verdict));
    }
    Ok(lines)
}

fn criterion_10() -> Outcome {
    let spec = e(parse_spec(
        r#"{"inputs":[{"family":"gevrey","params":{"s":1},"horizon":256},
                      {"family":"q_gevrey","params":{"q":2,"n":2},"horizon":128},
                      {"counterexample":{"levels":6}},
                      {"log_power":{"s":2},"horizon":64}],
            "conditions":["weight_conditions","matrix_mg","rstrange","bstrange"]}"#,
    ))?;
    let first = e(render_json(&e(run_analysis(&spec))?))?;
    for _ in 0..3 {
        let again = e(render_json(&e(run_analysis(&spec))?))?;
        ensure(again == first, || {
            "analyze output differs between runs".into()
        })?;
    }
    Ok(vec![format!(
        "4 runs, {} bytes each, identical",
        first.len()
    )])
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact identities", criterion_1),
        ("conjugate interpolation validated", criterion_2),
        ("matrix identities on the dyadic grid", criterion_3),
        ("moderate growth battery coincidence", criterion_4),
        ("quotient/root comparison vs growth index", criterion_5),
        ("counterexample reproduction", criterion_6),
        ("schedule variants", criterion_7),
        ("matrix mg holds while quotient/root fails", criterion_8),
        ("condition propagation and admissibility", criterion_9),
        ("determinism", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match run() {
            Ok(details) => {
                println!(
                    "criterion {:>2}: PASS  {name} ({:.1}s)",
                    k + 1,
                    t.elapsed().as_secs_f64()
                );
                for d in details {
                    println!("                {d}");
                }
            }
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of 10 passed in {:.1}s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
