use mis_lab::boundary::SpeedSpec;
use mis_lab::lattice::HistFlavor;
use mis_lab::sft2d::catalog;
use mis_lab::*;

use crate::output::Table;
use crate::parse;
use crate::{Command, Context};

/// Decimal rendering with as many digits as the ball certifies (at most 40).
fn dec(x: &HighPrecReal) -> String {
    let err = x.error_bound().max(2f64.powi(-(x.prec() as i32)));
    let digits = if err > 0.0 { (-err.log10()).floor() } else { 40.0 };
    x.to_decimal_string(digits.clamp(1.0, 40.0) as usize)
}

fn mis_system(ctx: &Context) -> Result<MisSpec> {
    match ctx.config()?.system()? {
        System::Mis(m) => Ok(m),
        System::Sft2d(_) => Err(MisError::InvalidSpec {
            field: "system".into(),
            reason: "this command needs a system of type \"mis\"".into(),
        }),
    }
}

fn sft_system(ctx: &Context) -> Result<Sft2dSpec> {
    match ctx.config()?.system()? {
        System::Sft2d(s) => Ok(s),
        System::Mis(_) => Err(MisError::InvalidSpec {
            field: "system".into(),
            reason: "this command needs a system of type \"sft2d\"".into(),
        }),
    }
}

fn lattice_box(field: &str, sides: &[String]) -> Result<LatticeBox> {
    let sides = sides.iter().map(|s| parse::big_uint(field, s)).collect::<Result<Vec<_>>>()?;
    LatticeBox::new(sides)
}

pub fn dispatch(cmd: &Command, ctx: &Context) -> Result<(Table, bool)> {
    let table = match cmd {
        Command::Count { sides, inner, exact } => count(ctx, sides, inner.as_deref(), *exact)?,
        Command::Entropy { tol } => entropy(ctx, *tol)?,
        Command::Boundary { tau, m } => boundary(ctx, tau, m.as_deref())?,
        Command::Realize { target, prec } => realize_targets(ctx, target, *prec)?,
        Command::Sft2d {
            strip,
            mix,
            thickness,
            frame,
            glue_probe,
        } => sft2d(ctx, strip.as_deref(), mix.as_deref(), *thickness, frame.as_deref(), glue_probe.as_deref())?,
        Command::Surface { seq, n, prec } => surface(ctx, seq, n, prec.as_deref())?,
        Command::Selftest => return Ok(selftest()),
    };
    Ok((table, true))
}

fn count(ctx: &Context, sides: &[String], inner: Option<&[String]>, exact: bool) -> Result<Table> {
    let mis = mis_system(ctx)?;
    let outer = lattice_box("box", sides)?;
    if let Some(inner) = inner {
        let region = BoundaryRegion::new(outer.clone(), lattice_box("inner", inner)?)?;
        let lg = log_pattern_count_region(&mis, &region, 64)?;
        let mut t = Table::new(&["outer", "inner", "region_size", "ln_count"]);
        t.push(vec![outer.to_string(), region.inner().to_string(), region.size().to_string(), dec(&lg)]);
        return Ok(t);
    }
    let count = match pattern_count_exact(&mis, &outer, ctx.budgets.result_bits) {
        Ok(c) => c.to_string(),
        Err(e @ MisError::ResultTooLarge { .. }) if !exact => {
            eprintln!("note: {e}; reporting the logarithm only");
            String::new()
        }
        Err(e) => return Err(e),
    };
    let lg = log_pattern_count(&mis, &outer, 64)?;
    let mut t = Table::new(&["box", "count", "ln_count"]);
    t.push(vec![outer.to_string(), count, dec(&lg)]);
    Ok(t)
}

fn entropy(ctx: &Context, tol: f64) -> Result<Table> {
    let mis = mis_system(ctx)?;
    let h = mis_entropy(&mis, tol)?;
    let mut t = Table::new(&["tol", "entropy", "error_bound"]);
    t.push(vec![format!("{tol:e}"), dec(&h), format!("{:e}", h.error_bound())]);
    Ok(t)
}

fn boundary(ctx: &Context, taus: &[String], m: Option<&[String]>) -> Result<Table> {
    let mis = mis_system(ctx)?;
    let pt = mis.product();
    let m = m.map(|s| lattice_box("m", s)).transpose()?;
    let mut t = Table::new(&["tau", "level", "h_boundary", "empirical", "abs_diff"]);
    for s in taus {
        let tau = parse::rational("tau", s)?;
        let level = match classify_level(&tau, &pt) {
            Ok(l) => l.to_string(),
            Err(MisError::ZeroTau) => String::new(),
            Err(e) => return Err(e),
        };
        let h = h_boundary(&mis, &tau, 96)?;
        let (emp, diff) = match &m {
            Some(m) => {
                let speed = SpeedSpec::balanced(&tau, &mis.multipliers)?;
                let e = empirical_h_boundary(&mis, m, &speed, 96)?;
                let diff = e.distance_upper(&h);
                (dec(&e), format!("{diff:e}"))
            }
            None => (String::new(), String::new()),
        };
        t.push(vec![tau.to_string(), level, dec(&h), emp, diff]);
    }
    Ok(t)
}

fn realize_targets(ctx: &Context, targets: &[String], prec: u32) -> Result<Table> {
    let mis = mis_system(ctx)?;
    let mut t = Table::new(&["target_h", "level_k", "tau", "achieved_h", "abs_err"]);
    for s in targets {
        let q = parse::rational("target", s)?;
        let target = HighPrecReal::from_rational(&q, prec + 16);
        let r = realize(&mis, &target, prec)?;
        let back = h_boundary(&mis, &r.tau, prec + 16)?;
        t.push(vec![
            s.trim().to_string(),
            r.level.map_or_else(|| "none".to_string(), |l| l.to_string()),
            r.tau.to_string(),
            dec(&r.achieved),
            format!("{:e}", back.distance_upper(&target)),
        ]);
    }
    Ok(t)
}

fn sft2d(
    ctx: &Context,
    strip: Option<&[usize]>,
    mix: Option<&str>,
    thickness: usize,
    frame: Option<&[usize]>,
    glue: Option<&[usize]>,
) -> Result<Table> {
    let spec = sft_system(ctx)?;
    let rows = ctx.budgets.row_states;
    if let Some(&[k, i]) = strip {
        let sys = spec.build_strip(k, i, rows)?;
        let (rate, irreducible) = sys.matrix.log_spectral_radius(96)?;
        let mut t = Table::new(&["direction", "thickness", "states", "rate", "rate_per_thickness", "irreducible"]);
        t.push(vec![
            k.to_string(),
            i.to_string(),
            sys.states.len().to_string(),
            dec(&rate),
            dec(&rate.div_int(&BigInt::from(i))),
            irreducible.to_string(),
        ]);
        return Ok(t);
    }
    if let Some(s) = mix {
        let tv = parse::rational("mix", s)?;
        let (v, _) = spec.strip_entropy(1, thickness, 96, rows)?;
        let (h, _) = spec.strip_entropy(2, thickness, 96, rows)?;
        let one = BigRational::from_integer(1.into());
        let value = sft_boundary_complexity(&[v.clone(), h.clone()], thickness as u32, &[tv.clone(), &one - &tv])?;
        let mut t = Table::new(&["t", "thickness", "rate_v", "rate_h", "complexity"]);
        t.push(vec![tv.to_string(), thickness.to_string(), dec(&v), dec(&h), dec(&value)]);
        return Ok(t);
    }
    if let Some(&[m, n, i]) = frame {
        let c = spec.frame_count(m, n, i, rows)?;
        let mut t = Table::new(&["width", "height", "thickness", "count"]);
        t.push(vec![m.to_string(), n.to_string(), i.to_string(), c.to_string()]);
        return Ok(t);
    }
    if let Some(&[n, w]) = glue {
        let probe = spec.block_gluing_probe(n, w, ctx.budgets.configurations)?;
        let mut t = Table::new(&["gap", "window", "result", "detail"]);
        let digits = |b: &[u8]| b.iter().map(|d| char::from_digit(*d as u32, 36).unwrap_or('?')).collect::<String>();
        let (result, detail) = match probe {
            GluingProbe::Verified { pairs, .. } => ("verified", format!("{pairs} block pairs")),
            GluingProbe::Counterexample { first, second, offset } => (
                "counterexample",
                format!("{} and {} at offset ({} {})", digits(&first), digits(&second), offset.0, offset.1),
            ),
        };
        t.push(vec![n.to_string(), w.to_string(), result.to_string(), detail]);
        return Ok(t);
    }
    Err(MisError::InvalidSpec {
        field: "sft2d".into(),
        reason: "choose one of --strip, --mix, --frame, --glue-probe".into(),
    })
}

fn sequence(mis: &MisSpec, seq: &[String]) -> Result<SequenceSpec> {
    let bad = |reason: String| MisError::InvalidSpec {
        field: "seq".into(),
        reason,
    };
    match seq[0].as_str() {
        "power" => {
            let ks = seq[1..]
                .iter()
                .map(|s| s.parse::<u32>().map_err(|_| bad(format!("{s:?} is not an exponent"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(SequenceSpec::power(ks))
        }
        "offset" => {
            let [_, p, k, sign] = seq else {
                return Err(bad("expected `offset p k sign`".into()));
            };
            let p: u64 = p.parse().map_err(|_| bad(format!("{p:?} is not a multiplier")))?;
            if mis.multipliers.as_slice().iter().any(|&q| q != p) {
                return Err(bad(format!("p = {p} differs from the configured multipliers")));
            }
            let k: u64 = k.parse().map_err(|_| bad(format!("{k:?} is not an offset")))?;
            let sign = match sign.as_str() {
                "+" | "+1" | "1" => 1,
                "-" | "-1" => -1,
                s => return Err(bad(format!("sign {s:?} is not + or -"))),
            };
            let seq = SequenceSpec::Offset { k, sign };
            seq.validate(mis)?;
            Ok(seq)
        }
        s => Err(bad(format!("unknown sequence kind {s:?}; use power or offset"))),
    }
}

fn surface(ctx: &Context, seq: &[String], n: &str, prec: Option<&str>) -> Result<Table> {
    let mis = mis_system(ctx)?;
    let seq = sequence(&mis, seq)?;
    let ns = parse::u32_list("n", n)?;
    let policy = match prec {
        None => ctx.config()?.precision.policy(),
        Some("auto") => PrecisionPolicy::Auto,
        Some(b) => PrecisionPolicy::Bits(b.parse().ok().filter(|&b: &u32| b > 0).ok_or_else(|| MisError::InvalidSpec {
            field: "prec".into(),
            reason: format!("{b:?} is neither auto nor a bit count"),
        })?),
    };
    let rows = convergence_table(&mis, &seq, &ns, policy, ctx.budgets.precision_bits)?;
    let mut t = Table::new(&["n", "x_n", "y_n", "correction", "scaled", "predicted", "deviation", "deviation_4dp"]);
    for r in rows {
        let x = r.sides[0].to_string();
        let y = r.sides[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>().join("x");
        t.push(vec![
            r.n.to_string(),
            x,
            y,
            r.correction.to_sci_string(16),
            r.scaled.to_sci_string(16),
            dec(&r.predicted),
            dec(&r.deviation),
            r.deviation.to_decimal_string(4),
        ]);
    }
    Ok(t)
}

fn check(t: &mut Table, name: &str, ok: bool, detail: String) -> bool {
    t.push(vec![name.to_string(), if ok { "PASS" } else { "FAIL" }.to_string(), detail]);
    ok
}

pub fn selftest() -> (Table, bool) {
    let mut t = Table::new(&["check", "status", "detail"]);
    let mut ok = true;
    let run = |f: &dyn Fn() -> Result<(bool, String)>| f().unwrap_or_else(|e| (false, e.to_string()));
    let gm = |p: Vec<u64>| MisSpec::new(MultiplierVector::new(p).unwrap(), SubshiftSpec::golden_mean());

    let (pass, d) = run(&|| {
        let mis = gm(vec![2, 2]);
        let bx = LatticeBox::from_u64(&[3, 4])?;
        let a = pattern_count_exact(&mis, &bx, 1 << 20)?;
        let b = pattern_count_bruteforce(&mis, &bx, 1 << 24)?;
        Ok((a == b, format!("golden mean 3x4: {a} vs brute force {b}")))
    });
    ok &= check(&mut t, "count_vs_bruteforce", pass, d);

    let (pass, d) = run(&|| {
        let mv = MultiplierVector::new(vec![2, 3])?;
        let bx = LatticeBox::from_u64(&[300, 200])?;
        let (j, k) = enumerate_hist_oracle(&bx, &mv, 1 << 20)?;
        let same = j == hist_j(&bx, &mv) && k == hist_k(&bx, &mv) && k.flavor == HistFlavor::K;
        Ok((same, "300x200, p=(2,3)".to_string()))
    });
    ok &= check(&mut t, "histograms_vs_enumeration", pass, d);

    let (pass, d) = run(&|| {
        let mis = gm(vec![2, 3]);
        let h = mis_entropy_bits(&mis, 100)?;
        let top = LnContext::new(100).ln_u64(2);
        let target = (&h + &top).mul_rational(&BigRational::new(1.into(), 2.into()));
        let r = realize(&mis, &target, 80)?;
        let err = h_boundary(&mis, &r.tau, 100)?.distance_upper(&target);
        Ok((err <= 1e-10, format!("round-trip error {err:e}")))
    });
    ok &= check(&mut t, "realize_round_trip", pass, d);

    let (pass, d) = run(&|| {
        let s = catalog::vertical_golden_mean();
        let (v, _) = s.strip_entropy(1, 1, 80, 1 << 16)?;
        let (h, _) = s.strip_entropy(2, 1, 80, 1 << 16)?;
        let g = SubshiftSpec::golden_mean().entropy_rate_1d(80)?;
        let ok = v.distance_upper(&g) < 1e-10 && h.distance_upper(&LnContext::new(80).ln_u64(2)) < 1e-10;
        Ok((ok, format!("rates {} and {}", dec(&v), dec(&h))))
    });
    ok &= check(&mut t, "strip_rates", pass, d);

    let (pass, d) = run(&|| {
        let mis = MisSpec::new(MultiplierVector::new(vec![2, 3])?, SubshiftSpec::full_shift(2)?);
        let s = surface_correction(&mis, &LatticeBox::from_u64(&[1024, 729])?, 0)?;
        let bound = 2f64.powi(-(s.prec as i32) / 2);
        Ok((s.total.abs_upper_f64() <= bound, format!("|correction| <= {:e}", s.total.abs_upper_f64())))
    });
    ok &= check(&mut t, "full_shift_surface", pass, d);

    let (pass, d) = run(&|| {
        let mis = gm(vec![2]);
        let region = BoundaryRegion::new(LatticeBox::from_u64(&[8])?, LatticeBox::from_u64(&[4])?)?;
        let brute = region_projection_bruteforce(&mis, &region, 1 << 24)?;
        let lg = log_pattern_count_region(&mis, &region, 64)?;
        let expected = LnContext::new(80).ln_uint(&brute);
        Ok((lg.distance_upper(&expected) < 1e-12, format!("{brute} projections")))
    });
    ok &= check(&mut t, "region_vs_bruteforce", pass, d);

    (t, ok)
}
