//! Client for an external SMT solver.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::formula::{eval_formula, Assignment, Formula};
use super::smtlib::emit_smtlib;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverOutcome {
    /// `assignment` holds the values the solver printed as exact
    /// rationals; `verified` is true when they cover every variable and
    /// satisfy the formula exactly.
    Sat { assignment: Assignment, verified: bool },
    Unsat,
    Unknown(String),
}

/// Runs `template` (which must contain `{file}`) on the emitted script.
/// The template is split on whitespace and executed directly, without a
/// shell.
pub fn solve_external(f: &Formula, template: &str, timeout: Duration) -> Result<SolverOutcome> {
    if !template.contains("{file}") {
        return Err(Error::SolverCommand(format!("{template:?} lacks the {{file}} placeholder")));
    }
    let mut script = tempfile::Builder::new().prefix("aimc-").suffix(".smt2").tempfile()?;
    script.write_all(emit_smtlib(f).as_bytes())?;
    script.flush()?;
    let path = script.path().to_string_lossy().into_owned();
    let argv: Vec<String> = template.split_whitespace().map(|a| a.replace("{file}", &path)).collect();
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| Error::SolverCommand("empty command".into()))?;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::SolverLaunch(format!("{program}: {e}")))?;
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let start = Instant::now();
    loop {
        if child.try_wait()?.is_some() {
            break;
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(SolverOutcome::Unknown(format!("timeout after {} s", timeout.as_secs_f64())));
        }
        thread::sleep(Duration::from_millis(5));
    }
    let output = reader.join().unwrap_or_default();
    Ok(interpret(f, &output))
}

/// Interprets solver output for `f`.
pub fn interpret(f: &Formula, output: &str) -> SolverOutcome {
    let status = output.split_whitespace().next().unwrap_or("");
    match status {
        "unsat" => SolverOutcome::Unsat,
        "sat" => {
            let rest = &output[output.find("sat").expect("status present") + 3..];
            let assignment = parse_model(rest);
            let complete = f.variables.iter().all(|v| assignment.contains_key(v));
            if complete {
                match eval_formula(f, &assignment) {
                    Ok(true) => SolverOutcome::Sat {
                        assignment,
                        verified: true,
                    },
                    _ => SolverOutcome::Unknown("solver model fails the exact check".into()),
                }
            } else {
                SolverOutcome::Sat {
                    assignment,
                    verified: false,
                }
            }
        }
        "unknown" => SolverOutcome::Unknown("solver answered unknown".into()),
        "" => SolverOutcome::Unknown("empty solver output".into()),
        other => SolverOutcome::Unknown(format!("unparseable solver output starting with {other:?}")),
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexps(text: &str) -> Vec<Sexp> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut token = String::new();
    let flush = |token: &mut String, stack: &mut Vec<Vec<Sexp>>| {
        if !token.is_empty() {
            stack.last_mut().expect("nonempty stack").push(Sexp::Atom(std::mem::take(token)));
        }
    };
    for ch in text.chars() {
        match ch {
            '(' => {
                flush(&mut token, &mut stack);
                stack.push(Vec::new());
            }
            ')' => {
                flush(&mut token, &mut stack);
                if stack.len() > 1 {
                    let list = stack.pop().expect("checked length");
                    stack.last_mut().expect("nonempty stack").push(Sexp::List(list));
                }
            }
            c if c.is_whitespace() => flush(&mut token, &mut stack),
            c => token.push(c),
        }
    }
    flush(&mut token, &mut stack);
    while stack.len() > 1 {
        let list = stack.pop().expect("checked length");
        stack.last_mut().expect("nonempty stack").push(Sexp::List(list));
    }
    stack.pop().unwrap_or_default()
}

/// Exact value of a numeral, an exact decimal, `(/ a b)` or `(- a)`.
fn value_of(s: &Sexp) -> Option<Rational> {
    match s {
        Sexp::Atom(a) => parse_decimal(a),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => value_of(x).map(|v| -v),
            [Sexp::Atom(op), a, b] if op == "/" => {
                let (a, b) = (value_of(a)?, value_of(b)?);
                (!b.is_zero()).then(|| a / b)
            }
            _ => None,
        },
    }
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (int_part, frac) = text.split_once('.').unwrap_or((text, ""));
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(digits, scale))
}

/// Collects `(define-fun name () Real value)` entries with exact values.
fn parse_model(text: &str) -> Assignment {
    let mut out = Assignment::new();
    let mut visit = |items: &[Sexp]| {
        if let [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(params), _sort, value] = items {
            if kw == "define-fun" && params.is_empty() {
                if let Some(v) = value_of(value) {
                    out.insert(name.clone(), v);
                }
            }
        }
    };
    fn walk(s: &Sexp, visit: &mut dyn FnMut(&[Sexp])) {
        if let Sexp::List(items) = s {
            visit(items);
            for i in items {
                walk(i, visit);
            }
        }
    }
    for s in parse_sexps(text) {
        walk(&s, &mut visit);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::etr::formula::{Cmp, Prop, Term};
    use crate::rational::{int, ratio};

    fn y_is_half() -> Formula {
        Formula::new(vec![], Prop::atom(Cmp::Eq, Term::var("y"), Term::Const(ratio(1, 2))))
    }

    #[test]
    fn parses_rational_model_values() {
        let out = "sat\n(model\n  (define-fun y () Real\n    (/ 1 2))\n)\n";
        assert_eq!(
            interpret(&y_is_half(), out),
            SolverOutcome::Sat {
                assignment: Assignment::from([("y".to_string(), ratio(1, 2))]),
                verified: true
            }
        );
        let out = "sat\n((define-fun y () Real 0.5))";
        assert!(matches!(interpret(&y_is_half(), out), SolverOutcome::Sat { verified: true, .. }));
        let out = "sat\n((define-fun y () Real (- 3)))";
        assert!(matches!(interpret(&y_is_half(), out), SolverOutcome::Unknown(_)));
    }

    #[test]
    fn approximate_values_are_not_verified() {
        let out = "sat\n((define-fun y () Real 0.4999?))";
        assert_eq!(
            interpret(&y_is_half(), out),
            SolverOutcome::Sat {
                assignment: Assignment::new(),
                verified: false
            }
        );
    }

    #[test]
    fn status_words() {
        assert_eq!(interpret(&y_is_half(), "unsat\n"), SolverOutcome::Unsat);
        assert!(matches!(interpret(&y_is_half(), "unknown"), SolverOutcome::Unknown(_)));
        assert!(matches!(interpret(&y_is_half(), "(error \"x\")"), SolverOutcome::Unknown(_)));
        assert_eq!(parse_decimal("12.50"), Some(ratio(25, 2)));
        assert_eq!(parse_decimal("7"), Some(int(7)));
    }

    #[test]
    fn launch_failure_and_bad_template() {
        let f = y_is_half();
        let e = solve_external(&f, "/nonexistent/solver {file}", Duration::from_secs(5)).unwrap_err();
        assert!(e.to_string().contains("solver launch failed"), "{e}");
        assert!(matches!(
            solve_external(&f, "z3 -smt2", Duration::from_secs(5)),
            Err(Error::SolverCommand(_))
        ));
    }
}
