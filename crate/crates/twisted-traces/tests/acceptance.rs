//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits nonzero on any failure, except a failure listed in `KNOWN` whose diagnosis is
//! re-established at run time (the stated form fails and the corrected form holds).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;
use twisted_traces::arith::{is_squarefree, kronecker, Discriminant};
use twisted_traces::ball::Ctx;
use twisted_traces::cmeval::{eval_modfunc, minimal_polynomial, parse_modfunc};
use twisted_traces::genus::{
    chi_delta, chi_delta_lattice, chi_delta_oracle, is_admissible, lattice_coords,
};
use twisted_traces::jacobi::{
    check_jacobi_symmetries, cross_check, gen_a, gen_b, generating_form, hecke_rows, jacobi_scale,
    zagier_g,
};
use twisted_traces::qforms::{act, cm_point, positive_heegner_classes, Mat2, QuadForm};
use twisted_traces::traces::{
    assemble_lift, cusp_expansions, cusps, dconst, integer_principal_part, mu_params,
    trace_negative_fricke, trace_negative_mu, trace_positive, Cyclo, TwistData,
};
use twisted_traces::weilrep::{
    braid_residual, gauss_sum, gauss_sum_direct, rho_s, rho_t, unitarity_residual,
    verify_intertwining, DiscModule,
};

const KNOWN: &[u32] = &[7];

const TABLE: [(i64, i64, &str); 8] = [
    (6, 8, "380712960"),
    (13, 7, "-105512960"),
    (5, 19, "-17776273511920"),
    (14, 24, "789839951523840"),
    (4, 28, "12446972332605440"),
    (12, 32, "162066199437803520"),
    (3, 35, "-1001261756125748754"),
    (7, 39, "-10093084485445877760"),
];

struct Outcome {
    pass: bool,
    detail: String,
    known_diagnosis: bool,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
        known_diagnosis: false,
    }
}

fn disc(d: i64) -> Discriminant {
    Discriminant::new(d).unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn level_eleven() -> TwistData {
    TwistData::new(11, disc(5), 7).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let f = parse_modfunc("J(11z)").unwrap();
    let data = level_eleven();
    let mut worst = 0f64;
    let mut bad = Vec::new();
    for (h, d, v) in TABLE {
        match trace_positive(&f, &data, h, &rat(d, 44), 64) {
            Ok(t) => {
                worst = worst.max(t.error_bound);
                if t.value.to_string() != v || t.error_bound >= 0.5 {
                    bad.push(format!("h={h} d={d}: {}", t.value));
                }
            }
            Err(e) => bad.push(format!("h={h} d={d}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut detail = format!("8 values, max error {worst:.1e}, {secs:.2}s");
    if !bad.is_empty() {
        detail = format!("{detail}; mismatches: {}", bad.join("; "));
    }
    ok(bad.is_empty() && secs <= 300.0, detail)
}

fn criterion_2() -> Outcome {
    let f = parse_modfunc("J(11z)").unwrap();
    let classes = positive_heegner_classes(11, -40, 2).unwrap();
    let values: Vec<_> = classes
        .iter()
        .map(|c| eval_modfunc(&f, &cm_point(&c.form).unwrap(), 64).unwrap())
        .collect();
    let poly = minimal_polynomial(&values, &Ctx::new(256)).unwrap();
    let expected: Vec<BigInt> = vec![8786430582336i64.into(), (-425691312i64).into(), 1.into()];
    let z0 = values
        .iter()
        .map(|v| v.re.to_f64())
        .fold(f64::INFINITY, f64::min);
    let pass = poly == expected && (z0 - 20641.38121).abs() < 1e-4;
    ok(
        pass,
        format!("x^2 + ({})x + {}, f(z0) = {z0:.6}", poly[1], poly[0]),
    )
}

fn coeffs(
    phi: &twisted_traces::qseries::JacobiSeries,
    n: i64,
    rs: std::ops::RangeInclusive<i64>,
) -> Vec<String> {
    rs.map(|r| phi.coeff(n, r).to_string()).collect()
}

fn criterion_3() -> Outcome {
    let principal = vec![(-11i64, BigInt::from(1))];
    let one = match generating_form(&principal, 11, disc(1), 2) {
        Ok(s) => s.form,
        Err(e) => return ok(false, format!("Δ=1: {e}")),
    };
    let five = match generating_form(&principal, 11, disc(5), 2) {
        Ok(s) => s.form,
        Err(e) => return ok(false, format!("Δ=5: {e}")),
    };
    let mut lead = vec!["0".to_string(); 23];
    for (r, c) in [(-11, "11"), (-1, "1"), (0, "-24"), (1, "1"), (11, "11")] {
        lead[(r + 11) as usize] = c.into();
    }
    let checks = [
        coeffs(&one, 0, -11..=11) == lead,
        coeffs(&one, 1, -6..=0)
            == [
                "-7256",
                "885480",
                "-16576512",
                "117966288",
                "-425691312",
                "884736744",
                "-1122626864",
            ],
        five.series.valuation() == -11
            && coeffs(&five, -11, -11..=11)
                .iter()
                .filter(|c| *c != "0")
                .count()
                == 2,
        five.coeff(-11, 11) == int(11) && five.coeff(-11, -11) == int(11),
        coeffs(&five, 1, -7..=0)
            == [
                "1",
                "-190356480",
                "8888136755960",
                "-6223486166302720",
                "500630878062874377",
                "-8824913060318164992",
                "45310559791371053140",
                "-77176788074781143040",
            ],
    ];
    let hits = checks.iter().filter(|c| **c).count();
    ok(
        hits == checks.len(),
        format!("{hits}/{} coefficient blocks match", checks.len()),
    )
}

fn criterion_4() -> Outcome {
    let principal = vec![(-11i64, BigInt::from(1))];
    let half = match generating_form(&principal, 11, disc(5), 4) {
        Ok(s) => s.form,
        Err(e) => return ok(false, e.to_string()),
    };
    let phi = jacobi_scale(&half, &int(-2));
    let f = parse_modfunc("J(11z)").unwrap();
    let data = level_eleven();
    let mut matched = 0;
    let mut bad = Vec::new();
    for (h, d, _) in TABLE {
        let t = trace_positive(&f, &data, h, &rat(d, 44), 64).unwrap().value;
        let r = (h + 10).rem_euclid(22) - 10;
        let n = (d + r * r) / 44;
        if phi.coeff(n, r) == t {
            matched += 1;
        } else {
            bad.push(format!("h={h} d={d}"));
        }
    }
    let lift = assemble_lift(&f, &data, &int(1), 64).unwrap();
    let cross = cross_check(&phi, &lift).unwrap();
    let agree = cross.iter().filter(|c| c.agree).count();
    ok(
        bad.is_empty() && agree == cross.len(),
        format!(
            "{matched}/8 table indices, {agree}/{} lift indices with m <= 1{}",
            cross.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; mismatches: {}", bad.join(" "))
            }
        ),
    )
}

fn criterion_5() -> Outcome {
    // (1, −4, 1) violates r² ≡ Δ mod 4N; r = 0 is the residue that exists
    let tuples = [(1u64, 5i64, 1i64), (11, 5, 7), (1, -3, 1), (1, -4, 0)];
    let mut notes = Vec::new();
    let mut pass = true;
    for (n, d, r) in tuples {
        let res: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&b| verify_intertwining(n, disc(d), r, b).unwrap().max())
            .collect();
        let monotone = res[0] >= res[1] && res[1] >= res[2];
        pass &= res[1] < 1e-20 && monotone;
        notes.push(format!(
            "({n},{d},{r}): {:.0e}/{:.0e}/{:.0e}",
            res[0], res[1], res[2]
        ));
    }
    ok(pass, notes.join(", "))
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let ctx = Ctx::new(160);
    let deltas: Vec<i64> = (-60i64..=60)
        .filter(|&d| d != 0 && Discriminant::fundamental(d).is_ok())
        .collect();
    let (mut worst, mut vanish) = (0f64, 0usize);
    for _ in 0..500 {
        let d = deltas[rng.gen_range(0..deltas.len())];
        let ad = d.abs();
        let m = ad * rng.gen_range(1..=60 / ad);
        let (a, b, n) = (
            rng.gen_range(-60..60),
            rng.gen_range(-60..60),
            rng.gen_range(-120..120),
        );
        let closed = gauss_sum(disc(d), m, a, b, n, &ctx).unwrap();
        let direct = gauss_sum_direct(disc(d), m, a, b, n, &ctx).unwrap();
        worst = worst.max(closed.sub(&direct, &ctx).mag());
        if n % (m / ad) != 0 {
            vanish += 1;
            worst = worst.max(direct.mag());
        }
    }
    ok(
        worst < 1e-25,
        format!("500 tuples, max deviation {worst:.1e}, {vanish} vanishing cases"),
    )
}

fn criterion_7() -> Outcome {
    let mut literal_fails = 0;
    let mut corrected_fails = 0;
    let mut rows_total = 0;
    for m in [2, 3] {
        let rows = hecke_rows(disc(5), m, 20, 64).unwrap();
        rows_total += rows.len();
        literal_fails += rows.iter().filter(|r| !r.traces_hold).count();
        corrected_fails += rows.iter().filter(|r| !r.plus_space_holds).count();
    }
    let pass = literal_fails == 0;
    let mut o = ok(
        pass,
        format!(
            "stated identity with t(J; dn²) fails at {literal_fails}/{rows_total} (m, d); \
             with the q^d coefficient of g_{{Δn²}} in place of t(J; dn²) it fails at {corrected_fails}/{rows_total}"
        ),
    );
    o.known_diagnosis = literal_fails > 0 && corrected_fails == 0 && index_hecke_holds();
    o
}

/// `t(J_p; d) = t(J; p²d) + (−d/p)·t(J; d) + p·t(J; d/p²)` at `Δ = 5`.
fn index_hecke_holds() -> bool {
    let t = |f: &str, d: i64| {
        twisted_traces::traces::trace_scalar(&parse_modfunc(f).unwrap(), 1, disc(5), d, 64)
            .unwrap()
            .value
    };
    [2i64, 3].iter().all(|&p| {
        (1..=12i64).filter(|d| matches!(d % 4, 0 | 3)).all(|d| {
            let mut rhs = t("J(z)", p * p * d) + t("J(z)", d) * BigInt::from(kronecker(-d, p));
            if d % (p * p) == 0 && matches!((d / (p * p)) % 4, 0 | 3) {
                rhs += t("J(z)", d / (p * p)) * BigInt::from(p);
            }
            t(&format!("J{p}(z)"), d) == rhs
        })
    })
}

fn criterion_8() -> Outcome {
    let f = parse_modfunc("J(11z)").unwrap();
    let exps = cusp_expansions(&f, 11).unwrap();
    let data = level_eleven();
    let principal = integer_principal_part(&exps[0]).unwrap();
    let mut compared = 0;
    let mut pass = true;
    for kp in 1..=3i64 {
        let m = rat(-5 * kp * kp, 44);
        let fricke = trace_negative_fricke(&principal, data.delta, kp);
        for h in (0..22).filter(|&h| data.in_support(h, &m)) {
            let mu = trace_negative_mu(&exps, &data, h, &m).unwrap().value;
            pass &= mu == BigRational::from_integer(fricke.clone() * -2);
            compared += 1;
        }
    }
    let mut collapse = 0;
    for kp in 1..=3i64 {
        for n in [-3i64, -2, -1, 1, 2, 3] {
            for cusp in cusps(11) {
                let mut acc = Cyclo::zero();
                for h in 0..22 {
                    if let Some(mu) = mu_params(11, data.delta, &cusp, 7 * h, 5 * kp) {
                        acc = acc.add(&mu.sum(kp * n).unwrap().scale(&int(mu.nu)));
                    }
                }
                pass &= acc == Cyclo::rational(int(5 * kp * kronecker(5, n) as i64));
                collapse += 1;
            }
        }
    }
    ok(
        pass,
        format!(
            "{compared} indices with −2·fricke = μ-assembled value, {collapse} collapse sums exact"
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut cases = 0;
    let mut nonzero = 0;
    for n in (1u64..=30).filter(|&n| is_squarefree(n as i64)) {
        for dv in [5i64, -3, -4, 8, -7, 12, 13, -8, 17, -11] {
            let delta = disc(dv);
            if !is_admissible(delta, n) {
                continue;
            }
            for cusp in cusps(n) {
                for h in 0..2 * n as i64 {
                    cases += 1;
                    nonzero += (dconst(n, delta, &cusp, h).unwrap() != 0) as usize;
                }
            }
        }
    }
    let lift = assemble_lift(
        &parse_modfunc("J(11z)").unwrap(),
        &level_eleven(),
        &int(1),
        64,
    )
    .unwrap();
    let constants_zero = lift
        .constant_terms()
        .all(|c| c.value.as_ref().is_some_and(|v| v.value.is_zero()));
    ok(
        nonzero == 0 && constants_zero && lift.is_holomorphic(),
        format!(
            "dconst nonzero in {nonzero}/{cases}; (11,5) lift constant terms zero: {constants_zero}, holomorphic: {}",
            lift.is_holomorphic()
        ),
    )
}

fn random_gamma0(rng: &mut StdRng, n: i64) -> Mat2 {
    let mut g = Mat2::IDENTITY;
    for _ in 0..rng.gen_range(1..6) {
        let k = rng.gen_range(-3..4);
        let s = match rng.gen_range(0..3) {
            0 => Mat2::t_pow(k),
            1 => Mat2::new(1, 0, n * k, 1),
            _ => Mat2::IDENTITY.neg(),
        };
        g = g.mul(&s);
    }
    g
}

fn criterion_10() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut rng = StdRng::seed_from_u64(10);
    let deltas = [1i64, 5, -7, -8, 12, -19, 37];
    let mut chi_bad = 0;
    let mut cases = 0;
    while cases < 1000 {
        let f = QuadForm::new(
            11 * rng.gen_range(1..8),
            rng.gen_range(-30..30),
            rng.gen_range(1..40),
        );
        if f.disc() >= 0 {
            continue;
        }
        cases += 1;
        let d = disc(deltas[rng.gen_range(0..deltas.len())]);
        let v = chi_delta(d, 11, &f).unwrap();
        let g = random_gamma0(&mut rng, 11);
        let (a, b, c) = lattice_coords(11, &f).unwrap();
        if chi_delta(d, 11, &act(&g, &f).unwrap()).unwrap() != v
            || chi_delta_lattice(d, 11, c, -b, a).unwrap() != v
        {
            chi_bad += 1;
        }
    }
    pass &= chi_bad == 0;
    notes.push(format!("χ invariance {}/1000", 1000 - chi_bad));

    let mut gkz = 0;
    let mut gkz_bad = 0;
    for n in [1i64, 11] {
        let ds: &[i64] = if n == 1 {
            &[1, 5, -3, -4, 8]
        } else {
            &[1, 5, -7, -8, 12]
        };
        for k in -6..=6i64 {
            for b in -25..=25i64 {
                for c in -30..=30i64 {
                    let f = QuadForm::new(n * k, b, c);
                    if f.disc() == 0 || f.disc().abs() > 200 {
                        continue;
                    }
                    for &d in ds {
                        gkz += 1;
                        if chi_delta(disc(d), n as u64, &f).unwrap()
                            != chi_delta_oracle(disc(d), n as u64, &f, 40).unwrap()
                        {
                            gkz_bad += 1;
                        }
                    }
                }
            }
        }
    }
    pass &= gkz_bad == 0;
    notes.push(format!("product formula = oracle {}/{gkz}", gkz - gkz_bad));

    let ctx = Ctx::new(128);
    let mut weil = 0f64;
    for (n, d) in [(1u64, 1i64), (11, 1), (2, 1), (1, -3)] {
        let m = DiscModule::new(n, disc(d)).unwrap();
        weil = weil
            .max(unitarity_residual(&rho_s(&m, &ctx), &ctx))
            .max(unitarity_residual(&rho_t(&m, &ctx), &ctx))
            .max(braid_residual(&m, &ctx));
    }
    pass &= weil < 1e-30;
    notes.push(format!("Weil residual {weil:.0e}"));

    let principal = vec![(-11i64, BigInt::from(1))];
    let mut forms = vec![gen_a(10), gen_b(10)];
    for d in [1, 5] {
        forms.push(generating_form(&principal, 11, disc(d), 3).unwrap().form);
    }
    let g_ok = zagier_g(5, 40).is_ok() && zagier_g(8, 40).is_ok();
    let sym_ok = forms.iter().all(|f| check_jacobi_symmetries(f).is_ok());
    pass &= sym_ok && g_ok;
    notes.push(format!(
        "Jacobi symmetries on {} forms: {sym_ok}, plus-space single-valued: {g_ok}",
        forms.len()
    ));
    ok(pass, notes.join("; "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "trace table at (11, 5, 7)", criterion_1),
        (2, "CM algebraicity", criterion_2),
        (3, "Jacobi generating series", criterion_3),
        (4, "main-theorem cross-check", criterion_4),
        (5, "Weil intertwining", criterion_5),
        (6, "Gauss sums", criterion_6),
        (7, "Hecke relation", criterion_7),
        (8, "negative-index consistency", criterion_8),
        (9, "structural vanishing", criterion_9),
        (10, "property suites", criterion_10),
    ];
    let mut unexplained = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {id:>2} {name}: {} [{secs:.1}s]", o.detail);
        if !o.pass {
            if KNOWN.contains(&id) && o.known_diagnosis {
                println!("     known discrepancy, diagnosis re-verified: stated form false, corrected forms hold");
            } else {
                unexplained += 1;
            }
        }
    }
    if unexplained > 0 {
        std::process::exit(1);
    }
}
