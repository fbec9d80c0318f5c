//! Declarative derivation chains. A scenario file declares a model, named
//! parameters, classes and bundles, then runs an ordered list of steps:
//! residual computations, solves, substitutions, assertions and integer
//! searches. The builtin scenarios are embedded copies of files in the
//! same grammar, so a file that reproduces one byte-for-byte runs
//! identically.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::chern::{
    det_twist, dual, porteous_codim2, porteous_codim3, schur_s22, twist_line, whitney,
    FormalBundle,
};
use crate::chow::{
    numerical_dimension, top_intersect, ChowClass, ChowModel, Dim, DivSym, DivisorCombo,
    PairingTable,
};
use crate::dioph::{quadratic_scan, search_box, SearchBox};
use crate::parse::{parse_expression_at, Ast, LowerCtx, ParseError};
use crate::poly::{Param, PolyExpr};
use crate::rat::rat;
use crate::ulrich::{chi_root_count, residual_c1, residual_c2, residual_c3, rr_surface_bundle, UlrichContext};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Expr(#[from] ParseError),
    #[error("step {step} ({kind}) failed: expected {expected}, got {actual}")]
    Assertion {
        step: usize,
        kind: String,
        expected: String,
        actual: String,
    },
    #[error("step {step}: {message}")]
    Step { step: usize, message: String },
    #[error("unknown builtin scenario '{0}'")]
    UnknownBuiltin(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Syntax {
        line,
        message: message.into(),
    }
}

/// One source line of a scenario, with its 1-based line number.
#[derive(Clone, Debug)]
struct Line {
    no: usize,
    text: String,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    lines: Vec<Line>,
}

/// Outcome of a single executed step.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub index: usize,
    pub kind: String,
    pub pass: bool,
    pub detail: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub scenario: String,
    pub steps: Vec<StepReport>,
    pub passed: bool,
    pub final_note: Option<String>,
    pub elapsed: Duration,
}

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}", self.scenario);
        for s in &self.steps {
            let status = if s.pass { "PASS" } else { "FAIL" };
            let detail: Vec<String> = s
                .detail
                .iter()
                .map(|(k, v)| format!("{}={}", k, quote(v)))
                .collect();
            let _ = writeln!(
                out,
                "STEP {} {} {} {}",
                s.index,
                s.kind,
                status,
                detail.join(" ")
            );
        }
        if let Some(note) = &self.final_note {
            let _ = writeln!(out, "FINAL {}", note);
        }
        let _ = writeln!(
            out,
            "VERDICT {} ({} steps, {} ms)",
            if self.passed { "PASS" } else { "FAIL" },
            self.steps.len(),
            self.elapsed.as_millis()
        );
        out
    }

    /// Machine-readable line format: one record per step.
    pub fn render_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let status = if s.pass { "PASS" } else { "FAIL" };
            let detail: Vec<String> = s
                .detail
                .iter()
                .map(|(k, v)| format!("{}={}", k, quote(v)))
                .collect();
            let _ = writeln!(
                out,
                "STEP {} {} {} {}",
                s.index,
                s.kind,
                status,
                detail.join(" ")
            );
        }
        out
    }

    pub fn first_failure(&self) -> Option<&StepReport> {
        self.steps.iter().find(|s| !s.pass)
    }
}

fn quote(v: &str) -> String {
    if v.contains(' ') {
        format!("\"{}\"", v)
    } else {
        v.to_string()
    }
}

struct Env {
    model: Option<Arc<ChowModel>>,
    params: BTreeSet<Param>,
    classes: BTreeMap<String, ChowClass>,
    polys: BTreeMap<String, PolyExpr>,
    bundles: BTreeMap<String, FormalBundle>,
    overrides: BTreeMap<String, (Option<ChowClass>, Option<ChowClass>)>,
    pending_pairings: Vec<(usize, String, String, String)>,
    model_line: Option<(usize, Vec<(String, String)>, String)>,
}

impl Env {
    fn new() -> Self {
        Env {
            model: None,
            params: BTreeSet::new(),
            classes: BTreeMap::new(),
            polys: BTreeMap::new(),
            bundles: BTreeMap::new(),
            overrides: BTreeMap::new(),
            pending_pairings: Vec::new(),
            model_line: None,
        }
    }

    fn model(&self, line: usize) -> Result<&Arc<ChowModel>, ScenarioError> {
        self.model
            .as_ref()
            .ok_or_else(|| syntax(line, "no model declared"))
    }

    fn ctx(&self) -> LowerCtx<'_> {
        LowerCtx {
            model: self.model.as_deref(),
            params: &self.params,
            classes: &self.classes,
            polys: &self.polys,
            auto_params: false,
        }
    }

    fn parse_poly(&self, text: &str, line: usize) -> Result<PolyExpr, ScenarioError> {
        let ast = parse_expression_at(text, line)?;
        Ok(self.ctx().lower_poly(&ast)?)
    }

    fn parse_class(&self, text: &str, line: usize) -> Result<ChowClass, ScenarioError> {
        let ast = parse_expression_at(text, line)?;
        Ok(self.ctx().lower_class(&ast)?)
    }

    /// A polynomial value: an expression over parameters and stored
    /// `@name` values.
    fn poly_value(&self, text: &str, line: usize) -> Result<PolyExpr, ScenarioError> {
        self.parse_poly(text, line)
    }

    fn poly_named(&self, name: &str, line: usize) -> Result<&PolyExpr, ScenarioError> {
        self.polys
            .get(name)
            .ok_or_else(|| syntax(line, format!("unknown polynomial '{}'", name)))
    }

    fn bundle_named(&self, name: &str, line: usize) -> Result<&FormalBundle, ScenarioError> {
        self.bundles
            .get(name)
            .ok_or_else(|| syntax(line, format!("unknown bundle '{}'", name)))
    }

    fn declare(&mut self, name: &str, line: usize) -> Result<(), ScenarioError> {
        let taken = self.params.contains(&Param::new(name))
            || self.classes.contains_key(name)
            || self.polys.contains_key(name)
            || self.bundles.contains_key(name);
        if taken {
            return Err(syntax(line, format!("name '{}' is already in use", name)));
        }
        Ok(())
    }

    fn ulrich_context(&self, bundle: &str, line: usize) -> Result<UlrichContext, ScenarioError> {
        let b = self.bundle_named(bundle, line)?.clone();
        let (kx, c2x) = self
            .overrides
            .get(bundle)
            .cloned()
            .unwrap_or((None, None));
        Ok(UlrichContext {
            bundle: b,
            kx,
            c2x,
        })
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut name = None;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let stripped = match raw.find('#') {
            // '#' only starts a comment outside quotes
            Some(pos) if !in_quotes(raw, pos) => &raw[..pos],
            _ => raw,
        };
        let trimmed = stripped.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("scenario ") {
            if name.is_some() {
                return Err(syntax(no, "duplicate scenario header"));
            }
            name = Some(rest.trim().to_string());
            continue;
        }
        lines.push(Line {
            no,
            text: trimmed.to_string(),
        });
    }
    Ok(Scenario {
        name: name.ok_or_else(|| syntax(1, "missing 'scenario <name>' header"))?,
        lines,
    })
}

fn in_quotes(s: &str, pos: usize) -> bool {
    s[..pos].matches('"').count() % 2 == 1
}

/// Split `key=value` tokens on whitespace; values must not contain spaces.
fn kv_pairs(tokens: &[&str], line: usize) -> Result<Vec<(String, String)>, ScenarioError> {
    tokens
        .iter()
        .map(|t| {
            t.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| syntax(line, format!("expected key=value, found '{}'", t)))
        })
        .collect()
}

fn lookup<'a>(pairs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn require<'a>(
    pairs: &'a [(String, String)],
    key: &str,
    line: usize,
) -> Result<&'a str, ScenarioError> {
    lookup(pairs, key).ok_or_else(|| syntax(line, format!("missing '{}='", key)))
}

fn parse_range(text: &str, line: usize) -> Result<(i64, i64), ScenarioError> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| syntax(line, format!("expected lo..hi, found '{}'", text)))?;
    let lo = lo
        .parse()
        .map_err(|_| syntax(line, format!("bad integer '{}'", lo)))?;
    let hi = hi
        .parse()
        .map_err(|_| syntax(line, format!("bad integer '{}'", hi)))?;
    Ok((lo, hi))
}

fn parse_expect(text: &str, line: usize) -> Result<Vec<Vec<i64>>, ScenarioError> {
    if text == "empty" {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|sol| {
            let sol = sol.trim();
            let inner = sol
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| syntax(line, format!("expected (v,..) tuples, found '{}'", sol)))?;
            inner
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| syntax(line, format!("bad integer '{}'", v)))
                })
                .collect()
        })
        .collect()
}

/// Parse a value as a pure base divisor combination (a degree-one class
/// with no tautological part).
fn as_combo(class: &ChowClass, line: usize) -> Result<DivisorCombo, ScenarioError> {
    let mut combo = DivisorCombo::zero();
    for ((p, b), content) in class.terms() {
        match (p, b, content) {
            (0, 1, crate::chow::BaseContent::Divisor(c)) => combo = combo.add(c),
            _ => {
                return Err(syntax(
                    line,
                    "expected a pure base divisor combination".to_string(),
                ))
            }
        }
    }
    Ok(combo)
}

pub fn run_scenario(scenario: &Scenario) -> Result<Report, ScenarioError> {
    let start = Instant::now();
    let mut env = Env::new();
    let mut steps: Vec<StepReport> = Vec::new();
    let mut final_note = None;
    let mut passed = true;
    let mut step_index = 0usize;

    for line in &scenario.lines {
        let tokens: Vec<&str> = line.text.split_whitespace().collect();
        match tokens[0] {
            "model" => {
                let pairs = kv_pairs(&tokens[2..], line.no)?;
                env.model_line = Some((line.no, pairs, tokens[1].to_string()));
            }
            "pairing" => {
                // pairing (A,B) = <polyexpr>
                let rest = line.text["pairing".len()..].trim();
                let (pair, value) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line.no, "expected pairing (A,B) = value"))?;
                let pair = pair.trim();
                let inner = pair
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| syntax(line.no, "expected (A,B)"))?;
                let (a, b) = inner
                    .split_once(',')
                    .ok_or_else(|| syntax(line.no, "expected (A,B)"))?;
                env.pending_pairings.push((
                    line.no,
                    a.trim().to_string(),
                    b.trim().to_string(),
                    value.trim().to_string(),
                ));
            }
            "param" => {
                for name in &tokens[1..] {
                    env.declare(name, line.no)?;
                    env.params.insert(Param::new(name));
                }
                build_model_if_ready(&mut env)?;
            }
            "class" => {
                build_model_if_ready(&mut env)?;
                let rest = line.text["class".len()..].trim();
                let (name, expr) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line.no, "expected class NAME = <expr>"))?;
                let name = name.trim();
                env.declare(name, line.no)?;
                let class = env.parse_class(expr.trim(), line.no)?;
                env.classes.insert(name.to_string(), class);
            }
            "bundle" => {
                build_model_if_ready(&mut env)?;
                let name = tokens
                    .get(1)
                    .ok_or_else(|| syntax(line.no, "expected bundle NAME ..."))?;
                env.declare(name, line.no)?;
                let pairs = kv_pairs(&tokens[2..], line.no)?;
                let rank = env.parse_poly(require(&pairs, "rank", line.no)?, line.no)?;
                let mut c = [
                    ChowClass::zero(),
                    ChowClass::zero(),
                    ChowClass::zero(),
                    ChowClass::zero(),
                ];
                for (i, key) in ["c1", "c2", "c3", "c4"].iter().enumerate() {
                    if let Some(v) = lookup(&pairs, key) {
                        c[i] = env.parse_class(v, line.no)?;
                    }
                }
                let model = env.model(line.no)?.clone();
                let kx = match lookup(&pairs, "kx") {
                    Some(cls) => Some(env.parse_class(cls, line.no)?),
                    None => None,
                };
                let c2x = match lookup(&pairs, "c2x") {
                    Some(cls) => Some(env.parse_class(cls, line.no)?),
                    None => None,
                };
                env.overrides.insert(name.to_string(), (kx, c2x));
                env.bundles
                    .insert(name.to_string(), FormalBundle::new(rank, c, model));
            }
            "step" => {
                build_model_if_ready(&mut env)?;
                step_index += 1;
                let report = run_step(&mut env, &tokens[1..], &line.text, line.no, step_index)?;
                if !report.pass {
                    passed = false;
                }
                if report.kind == "final" {
                    final_note = report.detail.first().map(|(_, v)| v.clone());
                }
                let stop = !report.pass;
                steps.push(report);
                if stop {
                    break;
                }
            }
            other => {
                return Err(syntax(line.no, format!("unknown directive '{}'", other)));
            }
        }
    }

    Ok(Report {
        scenario: scenario.name.clone(),
        steps,
        passed,
        final_note,
        elapsed: start.elapsed(),
    })
}

/// Models are declared over several lines (model + pairing entries +
/// params); the model is assembled the first time something needs it.
fn build_model_if_ready(env: &mut Env) -> Result<(), ScenarioError> {
    if env.model.is_some() {
        return Ok(());
    }
    let (line, pairs, kind) = match env.model_line.take() {
        Some(m) => m,
        None => return Ok(()),
    };
    let dim_text = require(&pairs, "dim", line)?;
    let dim = match dim_text.parse::<u32>() {
        Ok(k) => Dim::Concrete(k),
        Err(_) => {
            let p = Param::new(dim_text);
            env.params.insert(p.clone());
            Dim::Symbolic(p)
        }
    };
    let model = match kind.as_str() {
        "pcurve" => {
            let g = env.parse_poly(require(&pairs, "g", line)?, line)?;
            let d = env.parse_poly(require(&pairs, "degf", line)?, line)?;
            ChowModel::curve(g, d, dim)
        }
        "hyperquadric" => {
            let g = env.parse_poly(require(&pairs, "g", line)?, line)?;
            let d = env.parse_poly(require(&pairs, "d", line)?, line)?;
            let e = env.parse_poly(require(&pairs, "e", line)?, line)?;
            ChowModel::hyperquadric(g, d, e, dim)
        }
        "psurface" => {
            let symbols: Vec<DivSym> = require(&pairs, "symbols", line)?
                .split(',')
                .map(DivSym::new)
                .collect();
            let mut table = PairingTable::new();
            for (pline, a, b, value) in env.pending_pairings.drain(..).collect::<Vec<_>>() {
                let v = env.parse_poly(&value, pline)?;
                table.set(&DivSym::new(&a), &DivSym::new(&b), v);
            }
            // symbol names double as class atoms below, so a temporary
            // context with the symbols visible is needed for the combos
            let c2f = env.parse_poly(require(&pairs, "c2f", line)?, line)?;
            let c2b = env.parse_poly(require(&pairs, "c2b", line)?, line)?;
            let xi_top = match lookup(&pairs, "xi_top") {
                Some(v) => Some(env.parse_poly(v, line)?),
                None => None,
            };
            let probe = ChowModel::surface(
                symbols.clone(),
                table.clone(),
                DivisorCombo::zero(),
                PolyExpr::zero(),
                DivisorCombo::zero(),
                PolyExpr::zero(),
                Some(PolyExpr::zero()),
                dim.clone(),
            )
            .map_err(|e| syntax(line, e.to_string()))?;
            let probe_env = Env {
                model: Some(Arc::new(probe)),
                params: env.params.clone(),
                classes: BTreeMap::new(),
                polys: BTreeMap::new(),
                bundles: BTreeMap::new(),
                overrides: BTreeMap::new(),
                pending_pairings: Vec::new(),
                model_line: None,
            };
            let c1f = as_combo(
                &probe_env.parse_class(require(&pairs, "c1f", line)?, line)?,
                line,
            )?;
            let kb = as_combo(
                &probe_env.parse_class(require(&pairs, "kb", line)?, line)?,
                line,
            )?;
            ChowModel::surface(symbols, table, c1f, c2f, kb, c2b, xi_top, dim)
                .map_err(|e| syntax(line, e.to_string()))?
        }
        other => return Err(syntax(line, format!("unknown model kind '{}'", other))),
    };
    env.model = Some(Arc::new(model));
    Ok(())
}

fn pass_step(index: usize, kind: &str, detail: Vec<(String, String)>) -> StepReport {
    StepReport {
        index,
        kind: kind.to_string(),
        pass: true,
        detail,
    }
}

fn fail_step(index: usize, kind: &str, expected: String, actual: String) -> StepReport {
    StepReport {
        index,
        kind: kind.to_string(),
        pass: false,
        detail: vec![
            ("expected".to_string(), expected),
            ("actual".to_string(), actual),
        ],
    }
}

fn after_keyword<'a>(
    text: &'a str,
    keyword: &str,
    line: usize,
) -> Result<&'a str, ScenarioError> {
    let pos = text
        .find(keyword)
        .ok_or_else(|| syntax(line, format!("expected '{}'", keyword)))?;
    Ok(text[pos + keyword.len()..].trim())
}

fn run_step(
    env: &mut Env,
    tokens: &[&str],
    text: &str,
    line: usize,
    index: usize,
) -> Result<StepReport, ScenarioError> {
    let kind = tokens
        .first()
        .ok_or_else(|| syntax(line, "empty step"))?
        .to_string();
    match kind.as_str() {
        // step residual_c1 <bundle> as <name>
        "residual_c1" | "residual_c2" | "residual_c3" => {
            let bundle = tokens[1];
            let name = step_target_name(tokens, line)?;
            env.declare(&name, line)?;
            let ctx = env.ulrich_context(bundle, line)?;
            let value = match kind.as_str() {
                "residual_c1" => residual_c1(&ctx),
                "residual_c2" => residual_c2(&ctx),
                _ => residual_c3(&ctx),
            }
            .map_err(|e| ScenarioError::Step {
                step: index,
                message: e.to_string(),
            })?;
            let detail = vec![
                ("bundle".to_string(), bundle.to_string()),
                ("name".to_string(), name.clone()),
                ("value".to_string(), value.to_string()),
            ];
            env.polys.insert(name, value);
            Ok(pass_step(index, &kind, detail))
        }
        // step intersect <expr> ; <expr> ; ... as <name>
        "intersect" => {
            let body = after_keyword(text, "intersect", line)?;
            let (exprs, name) = body
                .rsplit_once(" as ")
                .ok_or_else(|| syntax(line, "expected ... as <name>"))?;
            let name = name.trim().to_string();
            env.declare(&name, line)?;
            let mut factors = Vec::new();
            for part in exprs.split(';') {
                factors.push(env.parse_class(part.trim(), line)?);
            }
            let model = env.model(line)?.clone();
            let value = top_intersect(&factors, &model).map_err(|e| ScenarioError::Step {
                step: index,
                message: e.to_string(),
            })?;
            let detail = vec![
                ("name".to_string(), name.clone()),
                ("value".to_string(), value.to_string()),
            ];
            env.polys.insert(name, value);
            Ok(pass_step(index, &kind, detail))
        }
        // step define <name> = <polyexpr>
        "define" => {
            let body = after_keyword(text, "define", line)?;
            let (name, expr) = body
                .split_once('=')
                .ok_or_else(|| syntax(line, "expected define <name> = <expr>"))?;
            let name = name.trim().to_string();
            env.declare(&name, line)?;
            let value = env.poly_value(expr.trim(), line)?;
            let detail = vec![
                ("name".to_string(), name.clone()),
                ("value".to_string(), value.to_string()),
            ];
            env.polys.insert(name, value);
            Ok(pass_step(index, &kind, detail))
        }
        // step solve <target> for <param> as <name>
        "solve" => {
            let target = tokens[1];
            let param = token_after(tokens, "for", line)?;
            let name = step_target_name(tokens, line)?;
            env.declare(&name, line)?;
            let poly = env.poly_named(target, line)?;
            let value = poly
                .solve_linear(&Param::new(param))
                .map_err(|e| ScenarioError::Step {
                    step: index,
                    message: e.to_string(),
                })?;
            let detail = vec![
                ("param".to_string(), param.to_string()),
                ("name".to_string(), name.clone()),
                ("value".to_string(), value.to_string()),
            ];
            env.polys.insert(name, value);
            Ok(pass_step(index, &kind, detail))
        }
        // step solve_rational <target> for <param> as <num> over <den>
        "solve_rational" => {
            let target = tokens[1];
            let param = Param::new(token_after(tokens, "for", line)?);
            let num_name = token_after(tokens, "as", line)?.to_string();
            let den_name = token_after(tokens, "over", line)?.to_string();
            env.declare(&num_name, line)?;
            env.declare(&den_name, line)?;
            let poly = env.poly_named(target, line)?;
            if poly.degree_in(&param) != 1 {
                return Err(ScenarioError::Step {
                    step: index,
                    message: format!("'{}' is not linear in {}", target, param),
                });
            }
            let coeffs = poly.coefficients_in(&param);
            let num = coeffs[0].neg();
            let den = coeffs[1].clone();
            let detail = vec![
                ("param".to_string(), param.name().to_string()),
                ("num".to_string(), num.to_string()),
                ("den".to_string(), den.to_string()),
            ];
            env.polys.insert(num_name, num);
            env.polys.insert(den_name, den);
            Ok(pass_step(index, &kind, detail))
        }
        // step subst <param> := <value> in <target> [as <name>]
        "subst" => {
            let body = after_keyword(text, "subst", line)?;
            let (param, rest) = body
                .split_once(":=")
                .ok_or_else(|| syntax(line, "expected subst <param> := <value> in <target>"))?;
            let (value_text, rest) = rest
                .rsplit_once(" in ")
                .ok_or_else(|| syntax(line, "expected ... in <target>"))?;
            let (target, rename) = match rest.split_once(" as ") {
                Some((t, n)) => (t.trim(), Some(n.trim().to_string())),
                None => (rest.trim(), None),
            };
            let param = Param::new(param.trim());
            let value = env.poly_value(value_text.trim(), line)?;
            let poly = env.poly_named(target, line)?.clone();
            let result = poly.substitute(&param, &value);
            let name = rename.unwrap_or_else(|| target.to_string());
            let detail = vec![
                ("param".to_string(), param.name().to_string()),
                ("target".to_string(), name.clone()),
                ("value".to_string(), result.to_string()),
            ];
            if name != target {
                env.declare(&name, line)?;
            }
            env.polys.insert(name, result);
            Ok(pass_step(index, &kind, detail))
        }
        // step subst_rational <param> := @num / @den in <target> [as <name>]
        "subst_rational" => {
            let body = after_keyword(text, "subst_rational", line)?;
            let (param, rest) = body
                .split_once(":=")
                .ok_or_else(|| syntax(line, "expected subst_rational <param> := @n / @d in <target>"))?;
            let (value_text, rest) = rest
                .rsplit_once(" in ")
                .ok_or_else(|| syntax(line, "expected ... in <target>"))?;
            let (num_text, den_text) = value_text
                .split_once('/')
                .ok_or_else(|| syntax(line, "expected @num / @den"))?;
            let (target, rename) = match rest.split_once(" as ") {
                Some((t, n)) => (t.trim(), Some(n.trim().to_string())),
                None => (rest.trim(), None),
            };
            let param = Param::new(param.trim());
            let num = env.poly_value(num_text.trim(), line)?;
            let den = env.poly_value(den_text.trim(), line)?;
            let poly = env.poly_named(target, line)?.clone();
            let result = poly.substitute_rational(&param, &num, &den);
            let name = rename.unwrap_or_else(|| target.to_string());
            let detail = vec![
                ("param".to_string(), param.name().to_string()),
                ("target".to_string(), name.clone()),
                ("terms".to_string(), result.num_terms().to_string()),
            ];
            if name != target {
                env.declare(&name, line)?;
            }
            env.polys.insert(name, result);
            Ok(pass_step(index, &kind, detail))
        }
        // step divide <target> by <value>
        "divide" => {
            let target = tokens[1].to_string();
            let divisor_text = after_keyword(text, " by ", line)?;
            let divisor = env.poly_value(divisor_text, line)?;
            let poly = env.poly_named(&target, line)?.clone();
            let result = poly.div_exact(&divisor).ok_or_else(|| ScenarioError::Step {
                step: index,
                message: format!("'{}' is not divisible by {}", target, divisor),
            })?;
            let detail = vec![
                ("target".to_string(), target.clone()),
                ("divisor".to_string(), divisor.to_string()),
            ];
            env.polys.insert(target, result);
            Ok(pass_step(index, &kind, detail))
        }
        "assert_zero" => {
            let target = tokens[1];
            let poly = env.poly_named(target, line)?;
            if poly.is_zero() {
                Ok(pass_step(
                    index,
                    &kind,
                    vec![("name".to_string(), target.to_string())],
                ))
            } else {
                Ok(fail_step(index, &kind, "0".to_string(), poly.to_string()))
            }
        }
        // step assert_equals <target> exact|primitive "<expr>"
        "assert_equals" => {
            let target = tokens[1];
            let mode = tokens[2];
            let golden_text = text
                .split_once('"')
                .and_then(|(_, rest)| rest.rsplit_once('"'))
                .map(|(inner, _)| inner)
                .ok_or_else(|| syntax(line, "expected a quoted golden expression"))?;
            let golden = env.parse_poly(golden_text, line)?;
            let value = env.poly_named(target, line)?;
            let (got, want) = match mode {
                "exact" => (value.clone(), golden),
                "primitive" => (value.primitive(), golden),
                other => return Err(syntax(line, format!("unknown mode '{}'", other))),
            };
            if got == want {
                Ok(pass_step(
                    index,
                    &kind,
                    vec![
                        ("name".to_string(), target.to_string()),
                        ("mode".to_string(), mode.to_string()),
                        ("value".to_string(), want.to_string()),
                    ],
                ))
            } else {
                Ok(fail_step(index, &kind, want.to_string(), got.to_string()))
            }
        }
        // step assert_class <name> equals <class-expr>
        "assert_class" => {
            let body = after_keyword(text, "assert_class", line)?;
            let (lhs, rhs) = body
                .split_once(" equals ")
                .ok_or_else(|| syntax(line, "expected assert_class <class> equals <expr>"))?;
            let got = env.parse_class(lhs.trim(), line)?;
            let want = env.parse_class(rhs.trim(), line)?;
            if got == want {
                Ok(pass_step(
                    index,
                    &kind,
                    vec![
                        ("class".to_string(), lhs.trim().to_string()),
                        ("value".to_string(), want.to_string()),
                    ],
                ))
            } else {
                Ok(fail_step(index, &kind, want.to_string(), got.to_string()))
            }
        }
        // step chern whitney <a> <b> as <name>, chern dual <b> as <name>,
        // chern twist <b> by <expr> as <name>, chern dettwist <b> by <expr> as <name>
        "chern" => {
            let op = tokens[1];
            match op {
                "whitney" => {
                    let a = env.bundle_named(tokens[2], line)?.clone();
                    let b = env.bundle_named(tokens[3], line)?.clone();
                    let name = step_target_name(tokens, line)?;
                    env.declare(&name, line)?;
                    let sum = whitney(&a, &b).map_err(|e| ScenarioError::Step {
                        step: index,
                        message: e.to_string(),
                    })?;
                    let detail = vec![
                        ("name".to_string(), name.clone()),
                        ("rank".to_string(), sum.rank.to_string()),
                    ];
                    env.bundles.insert(name, sum);
                    Ok(pass_step(index, "chern_whitney", detail))
                }
                "dual" => {
                    let b = env.bundle_named(tokens[2], line)?.clone();
                    let name = step_target_name(tokens, line)?;
                    env.declare(&name, line)?;
                    let d = dual(&b);
                    let detail = vec![("name".to_string(), name.clone())];
                    env.bundles.insert(name, d);
                    Ok(pass_step(index, "chern_dual", detail))
                }
                "twist" | "dettwist" => {
                    let b = env.bundle_named(tokens[2], line)?.clone();
                    let body = after_keyword(text, " by ", line)?;
                    let (expr, name) = body
                        .rsplit_once(" as ")
                        .ok_or_else(|| syntax(line, "expected ... as <name>"))?;
                    let name = name.trim().to_string();
                    env.declare(&name, line)?;
                    let class = env.parse_class(expr.trim(), line)?;
                    if op == "twist" {
                        let t = twist_line(&b, &class).map_err(|e| ScenarioError::Step {
                            step: index,
                            message: e.to_string(),
                        })?;
                        let detail = vec![("name".to_string(), name.clone())];
                        env.bundles.insert(name, t);
                        Ok(pass_step(index, "chern_twist", detail))
                    } else {
                        let det = det_twist(&b, &class);
                        let detail = vec![
                            ("name".to_string(), name.clone()),
                            ("value".to_string(), det.to_string()),
                        ];
                        env.classes.insert(name, det);
                        Ok(pass_step(index, "chern_dettwist", detail))
                    }
                }
                other => Err(syntax(line, format!("unknown chern op '{}'", other))),
            }
        }
        // step assert_chern <bundle> c1=<expr> c2=<expr> ... (space-free values)
        "assert_chern" => {
            let bundle = env.bundle_named(tokens[1], line)?.clone();
            let pairs = kv_pairs(&tokens[2..], line)?;
            for (key, value) in &pairs {
                let idx: usize = match key.as_str() {
                    "c1" => 1,
                    "c2" => 2,
                    "c3" => 3,
                    "c4" => 4,
                    other => return Err(syntax(line, format!("unknown chern slot '{}'", other))),
                };
                let want = env.parse_class(value, line)?;
                let got = bundle.c(idx);
                if got != &want {
                    return Ok(fail_step(
                        index,
                        &kind,
                        format!("{}={}", key, want),
                        format!("{}={}", key, got),
                    ));
                }
            }
            let detail: Vec<(String, String)> = pairs
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            Ok(pass_step(index, &kind, detail))
        }
        // step porteous2 <bundle> as <name> / step schur <bundle> as <name>
        "porteous2" | "schur" => {
            let b = env.bundle_named(tokens[1], line)?.clone();
            let name = step_target_name(tokens, line)?;
            env.declare(&name, line)?;
            let class = if kind == "porteous2" {
                porteous_codim2(&b)
            } else {
                schur_s22(&b)
            }
            .map_err(|e| ScenarioError::Step {
                step: index,
                message: e.to_string(),
            })?;
            let detail = vec![
                ("name".to_string(), name.clone()),
                ("value".to_string(), class.to_string()),
            ];
            env.classes.insert(name, class);
            Ok(pass_step(index, &kind, detail))
        }
        // step porteous3 <bundle> as <name1> <name2>
        "porteous3" => {
            let b = env.bundle_named(tokens[1], line)?.clone();
            let pos = tokens
                .iter()
                .position(|t| *t == "as")
                .ok_or_else(|| syntax(line, "expected as <name1> <name2>"))?;
            let n1 = tokens
                .get(pos + 1)
                .ok_or_else(|| syntax(line, "expected two names"))?
                .to_string();
            let n2 = tokens
                .get(pos + 2)
                .ok_or_else(|| syntax(line, "expected two names"))?
                .to_string();
            env.declare(&n1, line)?;
            env.declare(&n2, line)?;
            let (a, bb) = porteous_codim3(&b).map_err(|e| ScenarioError::Step {
                step: index,
                message: e.to_string(),
            })?;
            let detail = vec![
                ("c3sq".to_string(), a.to_string()),
                ("c2c4".to_string(), bb.to_string()),
            ];
            env.classes.insert(n1, a);
            env.classes.insert(n2, bb);
            Ok(pass_step(index, &kind, detail))
        }
        // step chi_surface rank=<v> c1=<v> c2=<v> as <name>
        "chi_surface" => {
            let pos = tokens
                .iter()
                .position(|t| *t == "as")
                .ok_or_else(|| syntax(line, "expected as <name>"))?;
            let pairs = kv_pairs(&tokens[1..pos], line)?;
            let name = tokens
                .get(pos + 1)
                .ok_or_else(|| syntax(line, "expected a name"))?
                .to_string();
            env.declare(&name, line)?;
            let rank = env.parse_poly(require(&pairs, "rank", line)?, line)?;
            let c1g = as_combo(
                &env.parse_class(require(&pairs, "c1", line)?, line)?,
                line,
            )?;
            let c2g = env.parse_poly(require(&pairs, "c2", line)?, line)?;
            let model = env.model(line)?.clone();
            let value =
                rr_surface_bundle(&model, &rank, &c1g, &c2g).map_err(|e| ScenarioError::Step {
                    step: index,
                    message: e.to_string(),
                })?;
            let detail = vec![
                ("name".to_string(), name.clone()),
                ("value".to_string(), value.to_string()),
            ];
            env.polys.insert(name, value);
            Ok(pass_step(index, &kind, detail))
        }
        // step chi_roots <target> var <param> required <k> expect true|false
        "chi_roots" => {
            let target = tokens[1];
            let var = Param::new(token_after(tokens, "var", line)?);
            let required: u32 = token_after(tokens, "required", line)?
                .parse()
                .map_err(|_| syntax(line, "bad integer"))?;
            let expect: bool = token_after(tokens, "expect", line)?
                .parse()
                .map_err(|_| syntax(line, "expected true|false"))?;
            let poly = env.poly_named(target, line)?;
            let got = chi_root_count(poly, &var, required).map_err(|e| ScenarioError::Step {
                step: index,
                message: e.to_string(),
            })?;
            if got == expect {
                Ok(pass_step(
                    index,
                    &kind,
                    vec![
                        ("degree".to_string(), poly.degree_in(&var).to_string()),
                        ("required".to_string(), required.to_string()),
                        ("forced".to_string(), got.to_string()),
                    ],
                ))
            } else {
                Ok(fail_step(index, &kind, expect.to_string(), got.to_string()))
            }
        }
        // step numdim <class> assign k=v,... expect <k>
        "numdim" => {
            let class = env
                .classes
                .get(tokens[1])
                .cloned()
                .ok_or_else(|| syntax(line, format!("unknown class '{}'", tokens[1])))?;
            let assigns = token_after(tokens, "assign", line)?;
            let expect: u32 = token_after(tokens, "expect", line)?
                .parse()
                .map_err(|_| syntax(line, "bad integer"))?;
            let mut assignment = BTreeMap::new();
            for part in assigns.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected k=v"))?;
                let v: i64 = v.parse().map_err(|_| syntax(line, "bad integer"))?;
                assignment.insert(Param::new(k), rat(v));
            }
            let model = env.model(line)?.clone();
            let got = numerical_dimension(&class, &model, &assignment).map_err(|e| {
                ScenarioError::Step {
                    step: index,
                    message: e.to_string(),
                }
            })?;
            if got == expect {
                Ok(pass_step(
                    index,
                    &kind,
                    vec![
                        ("class".to_string(), tokens[1].to_string()),
                        ("nu".to_string(), got.to_string()),
                    ],
                ))
            } else {
                Ok(fail_step(index, &kind, expect.to_string(), got.to_string()))
            }
        }
        // step diophantine <target> vars a,b box lo..hi,lo..hi expect ...
        "diophantine" => {
            let target = tokens[1];
            let vars: Vec<Param> = token_after(tokens, "vars", line)?
                .split(',')
                .map(Param::new)
                .collect();
            let ranges: Vec<(i64, i64)> = token_after(tokens, "box", line)?
                .split(',')
                .map(|r| parse_range(r, line))
                .collect::<Result<_, _>>()?;
            let expect = parse_expect(token_after(tokens, "expect", line)?, line)?;
            let poly = env.poly_named(target, line)?;
            let bx = SearchBox::new(vars, ranges);
            let got = search_box(poly, &bx).map_err(|e| ScenarioError::Step {
                step: index,
                message: e.to_string(),
            })?;
            if got == expect {
                Ok(pass_step(
                    index,
                    &kind,
                    vec![
                        ("name".to_string(), target.to_string()),
                        (
                            "solutions".to_string(),
                            if got.is_empty() {
                                "EMPTY".to_string()
                            } else {
                                render_solutions(&got)
                            },
                        ),
                    ],
                ))
            } else {
                Ok(fail_step(
                    index,
                    &kind,
                    render_solutions(&expect),
                    render_solutions(&got),
                ))
            }
        }
        // step quadscan <target> quad <v> scan <v> range lo..hi
        //      [filter <v> min <k>] expect ...
        "quadscan" => {
            let target = tokens[1];
            let quad = Param::new(token_after(tokens, "quad", line)?);
            let scan = Param::new(token_after(tokens, "scan", line)?);
            let range = parse_range(token_after(tokens, "range", line)?, line)?;
            let filter_min: Option<(String, i64)> =
                match tokens.iter().position(|t| *t == "filter") {
                    Some(pos) => {
                        let var = tokens
                            .get(pos + 1)
                            .ok_or_else(|| syntax(line, "expected filter <var> min <k>"))?;
                        if tokens.get(pos + 2) != Some(&"min") {
                            return Err(syntax(line, "expected filter <var> min <k>"));
                        }
                        let k: i64 = tokens
                            .get(pos + 3)
                            .ok_or_else(|| syntax(line, "expected filter <var> min <k>"))?
                            .parse()
                            .map_err(|_| syntax(line, "bad integer"))?;
                        Some((var.to_string(), k))
                    }
                    None => None,
                };
            let expect = parse_expect(token_after(tokens, "expect", line)?, line)?;
            let poly = env.poly_named(target, line)?;
            let mut got = quadratic_scan(poly, &quad, &scan, range).map_err(|e| {
                ScenarioError::Step {
                    step: index,
                    message: e.to_string(),
                }
            })?;
            if let Some((var, min)) = &filter_min {
                if var == quad.name() {
                    got.retain(|(q, _)| q >= min);
                } else {
                    got.retain(|(_, s)| s >= min);
                }
            }
            let got: Vec<Vec<i64>> = got.into_iter().map(|(q, s)| vec![q, s]).collect();
            if got == expect {
                Ok(pass_step(
                    index,
                    &kind,
                    vec![
                        ("name".to_string(), target.to_string()),
                        ("range".to_string(), format!("{}..{}", range.0, range.1)),
                        (
                            "solutions".to_string(),
                            if got.is_empty() {
                                "EMPTY".to_string()
                            } else {
                                render_solutions(&got)
                            },
                        ),
                    ],
                ))
            } else {
                Ok(fail_step(
                    index,
                    &kind,
                    render_solutions(&expect),
                    render_solutions(&got),
                ))
            }
        }
        // step final "<text>"
        "final" => {
            let note = text
                .split_once('"')
                .and_then(|(_, rest)| rest.rsplit_once('"'))
                .map(|(inner, _)| inner.to_string())
                .ok_or_else(|| syntax(line, "expected a quoted note"))?;
            Ok(pass_step(index, &kind, vec![("note".to_string(), note)]))
        }
        other => Err(syntax(line, format!("unknown step '{}'", other))),
    }
}

fn render_solutions(sols: &[Vec<i64>]) -> String {
    if sols.is_empty() {
        return "EMPTY".to_string();
    }
    sols.iter()
        .map(|s| {
            let inner: Vec<String> = s.iter().map(|v| v.to_string()).collect();
            format!("({})", inner.join(","))
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn step_target_name(tokens: &[&str], line: usize) -> Result<String, ScenarioError> {
    token_after(tokens, "as", line).map(|s| s.to_string())
}

fn token_after<'a>(
    tokens: &[&'a str],
    keyword: &str,
    line: usize,
) -> Result<&'a str, ScenarioError> {
    let pos = tokens
        .iter()
        .position(|t| *t == keyword)
        .ok_or_else(|| syntax(line, format!("expected '{}'", keyword)))?;
    tokens
        .get(pos + 1)
        .copied()
        .ok_or_else(|| syntax(line, format!("expected a token after '{}'", keyword)))
}

pub const BUILTIN_NAMES: [&str; 5] = ["pf_curve", "qf", "pf2", "sup", "esbs"];

pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "pf_curve" => Some(include_str!("scenarios/pf_curve.scen")),
        "qf" => Some(include_str!("scenarios/qf.scen")),
        "pf2" => Some(include_str!("scenarios/pf2.scen")),
        "sup" => Some(include_str!("scenarios/sup.scen")),
        "esbs" => Some(include_str!("scenarios/esbs.scen")),
        _ => None,
    }
}

pub fn run_builtin(name: &str) -> Result<Report, ScenarioError> {
    let source =
        builtin_source(name).ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_string()))?;
    run_scenario(&parse_scenario(source)?)
}

pub fn run_file(path: &std::path::Path) -> Result<Report, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    run_scenario(&parse_scenario(&text)?)
}

/// The model + bundle contexts behind each builtin chain, for ad-hoc
/// residual queries.
pub fn builtin_context(name: &str) -> Option<UlrichContext> {
    let v = PolyExpr::var;
    match name {
        "pf_curve" | "pf" => {
            let model = Arc::new(ChowModel::curve(
                PolyExpr::zero(),
                v("d"),
                Dim::Concrete(4),
            ));
            let c1 = ChowClass::xi()
                .sub(&ChowClass::fiber(&model))
                .scale(&v("a"));
            let mut b = FormalBundle::trivial(v("r"), model);
            b.c[0] = c1;
            Some(UlrichContext::new(b))
        }
        "qf" => {
            let model = Arc::new(ChowModel::hyperquadric(
                v("g"),
                v("d"),
                v("e"),
                Dim::Symbolic(Param::new("n")),
            ));
            let c1 = ChowClass::xi().add(&ChowClass::fiber(&model).scale(&v("m1")));
            let c2 = c1
                .mul(&ChowClass::fiber(&model).scale(&v("m2")), &model)
                .ok()?;
            let mut b = FormalBundle::trivial(v("r"), model);
            b.c[0] = c1;
            b.c[1] = c2;
            Some(UlrichContext::new(b))
        }
        "sup" => {
            let syms: Vec<DivSym> = ["KB", "C1F", "M1", "M2"].iter().map(DivSym::new).collect();
            let mut t = PairingTable::new();
            let entries = [
                ("KB", "KB", v("k2")),
                ("KB", "C1F", v("kc1")),
                ("KB", "M1", v("km1")),
                ("KB", "M2", v("km2")),
                ("C1F", "C1F", v("c12")),
                ("C1F", "M1", v("c1m1")),
                ("C1F", "M2", v("c1m2")),
                ("M1", "M1", v("m12")),
                ("M1", "M2", v("m1m2")),
                ("M2", "M2", PolyExpr::zero()),
            ];
            for (a, b, val) in entries {
                t.set(&DivSym::new(a), &DivSym::new(b), val);
            }
            let model = Arc::new(
                ChowModel::surface(
                    syms,
                    t,
                    DivisorCombo::sym(DivSym::new("C1F")),
                    v("c2"),
                    DivisorCombo::sym(DivSym::new("KB")),
                    v("c2B"),
                    None,
                    Dim::Symbolic(Param::new("n")),
                )
                .ok()?,
            );
            let n = v("n");
            let c1 = ChowClass::xi().add(&ChowClass::divisor(DivisorCombo::sym(DivSym::new(
                "M1",
            ))));
            let c2 = c1
                .mul(
                    &ChowClass::divisor(DivisorCombo::sym(DivSym::new("M2"))),
                    &model,
                )
                .ok()?;
            let mut b = FormalBundle::trivial(v("r"), model.clone());
            b.c[0] = c1;
            b.c[1] = c2;
            // the chain's pinned class variants (xi-coefficient one below
            // the bundle-theoretic canonical class of this family)
            let kx = ChowClass::xi()
                .scale(&n.sub(&PolyExpr::int(2)).neg())
                .add(&ChowClass::divisor(DivisorCombo::of([
                    (DivSym::new("KB"), PolyExpr::one()),
                    (DivSym::new("C1F"), PolyExpr::one()),
                ])));
            let c2x = ChowClass::xi_pow(2)
                .scale(&crate::poly::binom_poly(&n.sub(&PolyExpr::one()), 2))
                .add(
                    &ChowClass::xi()
                        .mul(
                            &ChowClass::divisor(DivisorCombo::of([
                                (DivSym::new("C1F"), n.sub(&PolyExpr::int(2)).neg()),
                                (DivSym::new("KB"), n.sub(&PolyExpr::int(2)).neg()),
                            ])),
                            &model,
                        )
                        .ok()?,
                )
                .add(&ChowClass::point(
                    v("c2").add(&v("kc1")).add(&v("c2B")),
                ));
            Some(UlrichContext {
                bundle: b,
                kx: Some(kx),
                c2x: Some(c2x),
            })
        }
        "pf2" => {
            let r = DivSym::new("R");
            let mut t = PairingTable::new();
            t.set(&r, &r, PolyExpr::one());
            let model = Arc::new(
                ChowModel::surface(
                    vec![r.clone()],
                    t,
                    DivisorCombo::of([(r.clone(), v("c1"))]),
                    v("c2"),
                    DivisorCombo::of([(r.clone(), PolyExpr::int(-3))]),
                    PolyExpr::int(3),
                    None,
                    Dim::Concrete(5),
                )
                .ok()?,
            );
            let c1e = ChowClass::xi()
                .sub(&ChowClass::divisor(DivisorCombo::sym(r.clone())))
                .scale(&v("a"));
            let c2e = ChowClass::xi_pow(2)
                .scale(&v("alpha"))
                .add(
                    &ChowClass::xi()
                        .mul(&ChowClass::divisor(DivisorCombo::sym(r)), &model)
                        .ok()?
                        .scale(&v("beta")),
                )
                .add(&ChowClass::point(v("gamma")));
            let mut b = FormalBundle::trivial(v("r"), model);
            b.c[0] = c1e;
            b.c[1] = c2e;
            Some(UlrichContext::new(b))
        }
        _ => None,
    }
}
