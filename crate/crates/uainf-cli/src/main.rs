//! `uainf`: batch front end for the uainf engine.
//!
//! Exit codes: 0 when every check passes, 1 on a mathematical defect, 2 on input or usage errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use uainf::algebra::{random_unital_dga, Bimodule, UnitalDga};
use uainf::aq::{compare_shift, hochschild_cohomology, Cotangent};
use uainf::bar::BarConstruction;
use uainf::cooperad::{coassoc_left, coassoc_right, counit_laws_hold, curvature_axiom_defect};
use uainf::io;
use uainf::operad::{check_d_squared, Convention};
use uainf::rectification::Rectification;
use uainf::shapes::Corolla;
use uainf::structures::{compose_morphisms, push_forward, random_components, InfinityMorphism, UAInfStructure};
use uainf::transfer::{transfer_morphism_in, transfer_structure_in, TransferContext};
use uainf::{sdr_to_homology, Error};

#[derive(Parser)]
#[command(name = "uainf", version, about = "Homotopy unital A-infinity algebras: operad checks, transfer, rectification, cohomology")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Aq,
    Hochschild,
    Compare,
}

#[derive(Subcommand)]
enum Command {
    /// d² = 0 on the resolution, coassociativity, counit and curvature axioms of the cooperad.
    CheckOperad {
        #[arg(long)]
        max_arity: usize,
        /// Where to write the TSV report (stdout if omitted).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Use a deliberately wrong sign in the differential.
        #[arg(long, hide = true)]
        inject_sign_fault: bool,
    },
    /// Transfers the structure of a strict algebra to its homology.
    Transfer {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        max_arity: usize,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        normalize_unit: bool,
        /// Structure file to write.
        #[arg(long)]
        out: PathBuf,
        /// Morphism file to write (default: next to `--out` with suffix `.morphism.json`).
        #[arg(long)]
        morphism_out: Option<PathBuf>,
    },
    /// André–Quillen and Hochschild cohomology dimensions.
    Cohomology {
        #[arg(long)]
        algebra: PathBuf,
        /// Coefficient bimodule (default: the algebra itself).
        #[arg(long)]
        bimodule: Option<PathBuf>,
        #[arg(long)]
        max_degree: usize,
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Bar construction, rectification and the universal morphism of a strict algebra.
    Rectify {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        max_weight: usize,
    },
    /// Checks the relations of a structure file.
    VerifyStructure {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        max_arity: Option<usize>,
    },
    /// Checks the equations of a morphism file.
    VerifyMorphism {
        #[arg(long)]
        morphism: PathBuf,
        #[arg(long)]
        max_arity: Option<usize>,
    },
    /// Random non-strict structures: relations, Maurer–Cartan and bar formulations must agree.
    SelftestStructures {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        count: u64,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
    },
    /// Random ∞-morphisms: verification, composition and defect detection.
    SelftestMorphisms {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        count: u64,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
    },
}

/// Report text plus whether every check passed.
struct Outcome {
    text: String,
    passed: bool,
}

fn status(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "defect"
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_algebra(path: &Path) -> Result<UnitalDga, Error> {
    io::parse_algebra(&read(path)?)
}

fn usage(msg: &str) -> Error {
    Error::Invalid(msg.into())
}

fn check_operad(max_arity: usize, fault: bool) -> Result<Outcome, Error> {
    if max_arity == 0 {
        return Err(usage("--max-arity must be at least 1"));
    }
    let conv = if fault { Convention::SignFault } else { Convention::Consistent };
    let d2 = check_d_squared(max_arity, conv);
    let mut text = String::from("check\tn\tS\tstatus\tdefect_terms\n");
    let mut passed = true;
    for r in &d2.rows {
        passed &= r.defect_terms == 0;
        let _ = writeln!(text, "d_squared\t{}\t{}\t{}\t{}", r.generator.n(), r.generator.cork_label(), status(r.defect_terms == 0), r.defect_terms);
    }
    let rows: Vec<(Corolla, usize, bool, usize)> = Corolla::all_up_to(max_arity)
        .into_par_iter()
        .map(|c| {
            let (l, r) = (coassoc_left(c), coassoc_right(c));
            let mismatched = l.keys().chain(r.keys()).filter(|k| l.get(*k) != r.get(*k)).count();
            (c, mismatched, counit_laws_hold(c), curvature_axiom_defect(c).len())
        })
        .collect();
    for (c, coassoc, counit, curv) in rows {
        passed &= coassoc == 0 && counit && curv == 0;
        let _ = writeln!(text, "coassociativity\t{}\t{}\t{}\t{}", c.n(), c.cork_label(), status(coassoc == 0), coassoc);
        let _ = writeln!(text, "counit\t{}\t{}\t{}\t{}", c.n(), c.cork_label(), status(counit), usize::from(!counit));
        let _ = writeln!(text, "curvature\t{}\t{}\t{}\t{}", c.n(), c.cork_label(), status(curv == 0), curv);
    }
    Ok(Outcome { text, passed })
}

fn transfer(algebra: &Path, max_arity: usize, normalize: bool, out: &Path, morphism_out: Option<&Path>) -> Result<Outcome, Error> {
    if max_arity < 2 {
        return Err(usage("--max-arity must be at least 2"));
    }
    let p = load_algebra(algebra)?;
    let a = UAInfStructure::from_unital_dga(&p, max_arity)?;
    let sdr = sdr_to_homology(&p.complex, normalize.then(|| p.unit_name()))?;
    let ctx = TransferContext::new(&a, &sdr, true)?;
    let v = Arc::new(transfer_structure_in(&ctx, max_arity)?);
    let f = transfer_morphism_in(&ctx, v.clone(), max_arity)?;
    let sreport = v.verify(max_arity)?;
    let mreport = f.verify(max_arity)?;
    let corked_vanish = v.maps().all(|(c, m)| c.n() < 2 || c.cork_count() == 0 || m.is_zero());
    let components_vanish = f.components().all(|(c, m)| c.cork_count() == 0 || m.is_zero());
    let passed = sreport.passed() && mreport.passed();
    let mut text = String::new();
    let _ = writeln!(text, "homology_dim\t{}", v.carrier().dim());
    let _ = writeln!(text, "structure\t{}\t{}", status(sreport.passed()), sreport.failures().len());
    let _ = writeln!(text, "morphism\t{}\t{}", status(mreport.passed()), mreport.failures().len());
    let _ = writeln!(text, "corked_operations_vanish\t{corked_vanish}");
    let _ = writeln!(text, "corked_components_vanish\t{components_vanish}");
    let nonzero: Vec<String> = v.maps().filter(|(_, m)| !m.is_zero()).map(|(c, _)| format!("{}:{}", c.n(), c.cork_label())).collect();
    let _ = writeln!(text, "nonzero_operations\t{}", nonzero.join(" "));
    if passed {
        let mpath = morphism_out.map(Path::to_path_buf).unwrap_or_else(|| {
            let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            out.with_file_name(format!("{stem}.morphism.json"))
        });
        write(out, &io::write_structure(&v))?;
        write(&mpath, &io::write_morphism(&f))?;
    } else {
        text.push_str(&sreport.tsv());
        text.push_str(&mreport.tsv());
    }
    Ok(Outcome { text, passed })
}

fn cohomology(algebra: &Path, bimodule: Option<&Path>, max_degree: usize, method: Method) -> Result<Outcome, Error> {
    let p = load_algebra(algebra)?;
    if !p.is_concentrated_in_degree_zero() {
        return Err(usage("cohomology needs an algebra concentrated in degree 0 with zero differential"));
    }
    let m = match bimodule {
        Some(path) => io::parse_bimodule(&read(path)?, &p)?,
        None => Bimodule::regular(&p),
    };
    let mut text = String::new();
    let mut passed = true;
    match method {
        Method::Aq | Method::Hochschild => {
            let dims = match method {
                Method::Aq => Cotangent::new(&p)?.cohomology(&m, max_degree)?,
                _ => hochschild_cohomology(&p, &m, max_degree)?,
            };
            text.push_str("degree\tdim\n");
            for (d, n) in dims.iter().enumerate() {
                let _ = writeln!(text, "{d}\t{n}");
            }
        }
        Method::Compare => {
            if max_degree < 1 {
                return Err(usage("the comparison starts in degree 1; use --max-degree ≥ 1"));
            }
            text.push_str("degree\taq\thochschild_shifted\tstatus\n");
            for r in compare_shift(&p, &m, max_degree)? {
                passed &= r.agrees();
                let _ = writeln!(text, "{}\t{}\t{}\t{}", r.degree, r.aq, r.hochschild, status(r.agrees()));
            }
        }
    }
    Ok(Outcome { text, passed })
}

fn rectify(algebra: &Path, max_weight: usize) -> Result<Outcome, Error> {
    let p = load_algebra(algebra)?;
    let s = UAInfStructure::from_unital_dga(&p, max_weight + 1)?;
    let bar = BarConstruction::new(&s, max_weight)?;
    let bar_bad = bar.codifferential_defect();
    let r = Rectification::new(&s, max_weight)?;
    let d2_bad = r.d_squared_failures();
    let arity = 3.min(max_weight + 1);
    let ia = r.universal_morphism().verify(arity)?;
    let passed = bar_bad.is_empty() && d2_bad.is_empty() && ia.passed();
    let mut text = String::from("check\tstatus\tdefects\n");
    let _ = writeln!(text, "bar_curvature\t{}\t{}", status(bar_bad.is_empty()), bar_bad.len());
    let _ = writeln!(text, "rectified_d_squared\t{}\t{}", status(d2_bad.is_empty()), d2_bad.len());
    let _ = writeln!(text, "universal_morphism\t{}\t{}", status(ia.passed()), ia.failures().len());
    let _ = writeln!(text, "generators\t{}", r.generators().len());
    Ok(Outcome { text, passed })
}

fn arity_within(requested: Option<usize>, bound: usize) -> Result<usize, Error> {
    match requested {
        Some(0) => Err(usage("--max-arity must be at least 1")),
        Some(n) if n > bound => Err(usage("--max-arity exceeds the bound declared in the file")),
        Some(n) => Ok(n),
        None => Ok(bound),
    }
}

fn verify_structure(path: &Path, max_arity: Option<usize>) -> Result<Outcome, Error> {
    let s = io::parse_structure(&read(path)?)?;
    let report = s.verify(arity_within(max_arity, s.bound())?)?;
    Ok(Outcome { text: report.tsv(), passed: report.passed() })
}

fn verify_morphism(path: &Path, max_arity: Option<usize>) -> Result<Outcome, Error> {
    let f = io::parse_morphism(&read(path)?)?;
    let bound = f.bound().min(f.source().bound()).min(f.target().bound());
    let report = f.verify(arity_within(max_arity, bound)?)?;
    Ok(Outcome { text: report.tsv(), passed: report.passed() })
}

/// A copy of `s` with one nonzero operation of arity at least 2 negated.
fn corrupt(s: &UAInfStructure) -> Option<UAInfStructure> {
    let (c, m) = s.maps().filter(|(c, m)| c.n() >= 2 && !m.is_zero()).last()?;
    let mut bad = s.clone();
    bad.set(*c, m.scaled(&uainf::rational::int(2))).ok()?;
    Some(bad)
}

fn selftest_structures(seed: u64, count: u64, max_arity: usize) -> Result<Outcome, Error> {
    if max_arity < 2 {
        return Err(usage("--max-arity must be at least 2"));
    }
    let rows: Vec<Result<(u64, [bool; 3], [bool; 3]), Error>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let p = random_unital_dga(seed.wrapping_add(i));
            let strict = Arc::new(UAInfStructure::from_unital_dga(&p, max_arity)?);
            let f = push_forward(&strict, &random_components(strict.carrier(), max_arity, seed.wrapping_add(i)))?;
            let s = f.target().clone();
            let judge = |x: &UAInfStructure| -> Result<[bool; 3], Error> {
                let bar = BarConstruction::new(x, max_arity - 1)?;
                Ok([x.verify(max_arity)?.passed(), x.mc_report(max_arity)?.passed(), bar.codifferential_defect().is_empty()])
            };
            let good = judge(&s)?;
            let bad = match corrupt(&s) {
                Some(b) => judge(&b)?,
                None => [false; 3],
            };
            Ok((i, good, bad))
        })
        .collect();
    let mut text = String::from("case\tinput\trelations\tmaurer_cartan\tbar\tagree\n");
    let mut passed = true;
    for row in rows {
        let (i, good, bad) = row?;
        for (label, r, expect) in [("valid", good, true), ("corrupted", bad, false)] {
            let agree = r.iter().all(|&x| x == expect);
            passed &= agree;
            let _ = writeln!(text, "{i}\t{label}\t{}\t{}\t{}\t{}", r[0], r[1], r[2], agree);
        }
    }
    Ok(Outcome { text, passed })
}

fn selftest_morphisms(seed: u64, count: u64, max_arity: usize) -> Result<Outcome, Error> {
    if max_arity < 2 {
        return Err(usage("--max-arity must be at least 2"));
    }
    let rows: Vec<Result<(u64, [bool; 4]), Error>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let s0 = seed.wrapping_add(i);
            let p = random_unital_dga(s0);
            let a = Arc::new(UAInfStructure::from_unital_dga(&p, max_arity)?);
            let f = push_forward(&a, &random_components(a.carrier(), max_arity, s0))?;
            let g = push_forward(f.target(), &random_components(a.carrier(), max_arity, s0.wrapping_add(1 << 32)))?;
            let gf = compose_morphisms(&g, &f, max_arity)?;
            let id = InfinityMorphism::identity(f.target().clone(), max_arity);
            let with_id = compose_morphisms(&id, &f, max_arity)?;
            let same = Corolla::all_up_to(max_arity).iter().all(|c| with_id.component(*c).ok() == f.component(*c).ok());
            let mut bad = f.clone();
            let (c, m) = f.components().filter(|(c, m)| c.n() >= 2 && !m.is_zero()).last().map(|(c, m)| (*c, m.clone())).unwrap();
            bad.set(c, m.scaled(&uainf::rational::int(2)))?;
            Ok((i, [f.verify(max_arity)?.passed(), gf.verify(max_arity)?.passed(), same, !bad.verify(max_arity)?.passed()]))
        })
        .collect();
    let mut text = String::from("case\tpush_forward\tcomposite\tidentity_law\tcorruption_detected\n");
    let mut passed = true;
    for row in rows {
        let (i, r) = row?;
        passed &= r.iter().all(|&x| x);
        let _ = writeln!(text, "{i}\t{}\t{}\t{}\t{}", r[0], r[1], r[2], r[3]);
    }
    Ok(Outcome { text, passed })
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::CheckOperad { max_arity, report, inject_sign_fault } => {
            let o = check_operad(max_arity, inject_sign_fault)?;
            match report {
                Some(path) => {
                    write(&path, &o.text)?;
                    let summary = format!("check-operad\t{}\n", status(o.passed));
                    Ok(Outcome { text: summary, passed: o.passed })
                }
                None => Ok(o),
            }
        }
        Command::Transfer { algebra, max_arity, normalize_unit, out, morphism_out } => {
            transfer(&algebra, max_arity, normalize_unit, &out, morphism_out.as_deref())
        }
        Command::Cohomology { algebra, bimodule, max_degree, method } => cohomology(&algebra, bimodule.as_deref(), max_degree, method),
        Command::Rectify { algebra, max_weight } => rectify(&algebra, max_weight),
        Command::VerifyStructure { structure, max_arity } => verify_structure(&structure, max_arity),
        Command::VerifyMorphism { morphism, max_arity } => verify_morphism(&morphism, max_arity),
        Command::SelftestStructures { seed, count, max_arity } => selftest_structures(seed, count, max_arity),
        Command::SelftestMorphisms { seed, count, max_arity } => selftest_morphisms(seed, count, max_arity),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 || rayon::ThreadPoolBuilder::new().num_threads(k).build_global().is_err() {
            eprintln!("error: cannot start {k} worker threads");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(o) => {
            print!("{}", o.text);
            ExitCode::from(if o.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
