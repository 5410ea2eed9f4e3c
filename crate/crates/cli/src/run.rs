//! Executes scenarios and assembles artifacts in memory before writing.

use std::path::{Path, PathBuf};

use arum_core::counterfactual::{
    attention_max_change_set, lp_counterfactual_bounds, parse_atom_family, CandidateAtom, LpCounterfactualProblem,
};
use arum_core::equivalence::{arum_e_to_cs, cs_to_arum, cs_to_arum_e, verify_equivalence};
use arum_core::grid::axis_values;
use arum_core::identification::{
    consideration_identified_set, discontinuity_experiment, proper_subset_diagnostics, sup_choice_prob,
    witness_lower_endpoint,
};
use arum_core::models::{monte_carlo_choice_prob, ModelFile, ShockLaw};
use arum_core::scalar::FLOAT_TOLERANCE;
use arum_core::welfare::{
    attention_welfare_set, envelope_check, integrand_samples, model_evaluator, model_path_integral,
    segment_breakpoints, unbounded_welfare_witness, welfare_change_exact, welfare_change_path_integral, WelfareSet,
    DEFAULT_PANELS, DEFAULT_PLOT_SAMPLES,
};
use arum_core::{
    choice_prob_field, ArumCsDistribution, ArumEDistribution, ChoiceModel, ChoiceProbField, Model, ModelClass,
    Rational, Scalar, UtilityGrid, UtilityPoint,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::scenario::{number, point, Analysis, Arithmetic, Loaded, Scenario, Source};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "arum-output";
pub const DEFAULT_TARGET_GAIN: &str = "10";
pub const DEFAULT_ENVELOPE_STEP: &str = "0.0001";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    /// Used when neither the flag nor the scenario names a directory.
    pub default_output_dir: Option<PathBuf>,
    pub arithmetic: Option<Arithmetic>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub artifacts: Vec<Artifact>,
}

struct AnalysisOutput {
    csv: String,
    json: Value,
    plot: Option<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

fn sv<T: Scalar>(x: &T) -> Value {
    Value::String(x.repr())
}

fn probs_repr<T: Scalar>(p: &[T]) -> String {
    p.iter().map(Scalar::repr).collect::<Vec<_>>().join(" ")
}

fn model_json<T: Scalar>(m: &Model<T>) -> Value {
    serde_json::to_value(ModelFile::from_model(m)).expect("model files serialise")
}

/// The ARUM-CS representation of any model.
fn to_cs<T: Scalar>(m: &Model<T>) -> ArumCsDistribution<T> {
    match m {
        Model::ArumCs(n) => n.clone(),
        Model::ArumE(e) => arum_e_to_cs(e),
        Model::Arum(a) => arum_e_to_cs(&ArumEDistribution::from(a.clone())),
    }
}

fn tolerance<T: Scalar>() -> T {
    if T::EXACT {
        T::zero()
    } else {
        T::from_f64(FLOAT_TOLERANCE).expect("finite")
    }
}

fn alternatives(k: Option<usize>, num: usize) -> Result<Vec<usize>> {
    match k {
        Some(k) if k >= num => Err(CliError::Validation(format!("alternative {k} out of range for K = {num}"))),
        Some(k) => Ok(vec![k]),
        None => Ok((0..num).collect()),
    }
}

fn require_model<'a, T: Scalar>(loaded: &'a Loaded<T>, kind: &str) -> Result<&'a Model<T>> {
    loaded.model().ok_or_else(|| CliError::Validation(format!("{kind} analysis needs a model, not a field")))
}

struct Context<T: Scalar> {
    loaded: Loaded<T>,
    field: ChoiceProbField<T>,
    seed: u64,
}

impl<T: Scalar> Context<T> {
    fn new(loaded: Loaded<T>, seed: u64) -> Result<Self> {
        let field = match &loaded.source {
            Source::Model(m) => choice_prob_field(m, &loaded.grid)?,
            Source::Field(f) => f.clone(),
        };
        Ok(Context { loaded, field, seed })
    }

    fn grid(&self) -> &UtilityGrid<T> {
        &self.loaded.grid
    }

    fn k_count(&self) -> usize {
        self.loaded.num_alternatives()
    }

    fn run(&self, a: &Analysis) -> Result<AnalysisOutput> {
        match a {
            Analysis::Equivalence { monte_carlo_draws, .. } => self.equivalence(*monte_carlo_draws),
            Analysis::Identify { k, .. } => self.identify(*k),
            Analysis::Discontinuity { k, scales, step, .. } => self.discontinuity(*k, scales, step.as_ref()),
            Analysis::Counterfactual { k, u_c, atom_grid, model_classes, .. } => {
                self.counterfactual(*k, u_c, atom_grid, model_classes.as_deref())
            }
            Analysis::Attention { k, .. } => self.attention(*k),
            Analysis::Welfare { .. } => self.welfare(a),
            Analysis::Diagnostics { .. } => self.diagnostics(),
        }
    }

    fn equivalence(&self, draws: Option<usize>) -> Result<AnalysisOutput> {
        let m = require_model(&self.loaded, "equivalence")?;
        let cs = to_cs(m);
        let e = cs_to_arum_e(&cs);
        let a = cs_to_arum(&cs, self.grid())?;
        let tol = tolerance::<T>();
        let r_cs = verify_equivalence(m, &cs, self.grid(), tol.clone())?;
        let r_e = verify_equivalence(m, &e, self.grid(), tol.clone())?;
        let r_a = verify_equivalence(m, &a, self.grid(), tol)?;
        let mut header = vec!["point", "p", "max_abs_diff_arum_cs", "max_abs_diff_arum_e", "max_abs_diff_arum"];
        if draws.is_some() {
            header.extend(["mc_max_abs_dev", "mc_max_z"]);
        }
        let mut rows = Vec::new();
        let mut mc_json = Vec::new();
        for (i, (u, p)) in self.field.iter().enumerate() {
            let mut row = vec![
                u.repr(),
                probs_repr(p.values()),
                r_cs.points[i].max_abs_diff.repr(),
                r_e.points[i].max_abs_diff.repr(),
                r_a.points[i].max_abs_diff.repr(),
            ];
            if let Some(n) = draws {
                let est = monte_carlo_choice_prob(ShockLaw::Finite(m), u, n as u64, self.seed.wrapping_add(i as u64))?;
                let exact = p.to_f64();
                let mut dev = 0.0f64;
                let mut z = 0.0f64;
                for ((q, pe), se) in est.probs.values().iter().zip(&exact).zip(&est.std_errors) {
                    let d = (q - pe).abs();
                    dev = dev.max(d);
                    z = z.max(if d == 0.0 {
                        0.0
                    } else if *se == 0.0 {
                        f64::INFINITY
                    } else {
                        d / se
                    });
                }
                row.push(dev.repr());
                row.push(z.repr());
                mc_json.push(json!({
                    "point": u.repr(),
                    "estimate": est.probs.values().iter().map(|x| x.repr()).collect::<Vec<_>>(),
                    "std_errors": est.std_errors.iter().map(|x| x.repr()).collect::<Vec<_>>(),
                    "draws": est.draws,
                }));
            }
            rows.push(row);
        }
        let mut j = json!({
            "source_class": m.class().as_str(),
            "source_sha256": m.content_hash(),
            "pass": r_cs.pass && r_e.pass && r_a.pass,
            "max_discrepancy": {
                "arum_cs": sv(&r_cs.max_discrepancy),
                "arum_e": sv(&r_e.max_discrepancy),
                "arum": sv(&r_a.max_discrepancy),
            },
            "tolerance": sv(&r_cs.tolerance),
            "models": {
                "arum_cs": model_json(&Model::ArumCs(cs)),
                "arum_e": model_json(&Model::ArumE(e)),
                "arum": model_json(&Model::Arum(a)),
            },
        });
        if draws.is_some() {
            j["monte_carlo"] = json!({ "seed": self.seed, "points": mc_json });
        }
        Ok(AnalysisOutput { csv: csv(&header, &rows), json: j, plot: None })
    }

    fn identify(&self, k: Option<usize>) -> Result<AnalysisOutput> {
        let mut rows = Vec::new();
        let mut items = Vec::new();
        for k in alternatives(k, self.k_count())? {
            let rep = consideration_identified_set(&self.field, k)?;
            let model_prob = self.loaded.model().map(|m| m.consideration_probability(k));
            let witness = match (self.loaded.model(), rep.sharp) {
                (Some(m), true) => Some(witness_lower_endpoint(&to_cs(m), self.grid(), k)?),
                _ => None,
            };
            let witness_prob = witness.as_ref().map(|w| w.consideration_probability(k));
            rows.push(vec![
                k.to_string(),
                rep.sup_pk.repr(),
                rep.argmax_point.repr(),
                rep.interval.lo.repr(),
                rep.interval.hi.repr(),
                rep.sharp.to_string(),
                rep.k_maximal_point.as_ref().map(UtilityPoint::repr).unwrap_or_default(),
                model_prob.as_ref().map(Scalar::repr).unwrap_or_default(),
                witness_prob.as_ref().map(Scalar::repr).unwrap_or_default(),
            ]);
            let mut item = serde_json::to_value(&rep).expect("report serialises");
            item["model_consideration_probability"] = model_prob.as_ref().map(sv).unwrap_or(Value::Null);
            if let Some(w) = witness {
                item["witness"] = json!({
                    "consideration_probability": sv(&w.consideration_probability(k)),
                    "model": model_json(&Model::ArumE(w)),
                });
            }
            items.push(item);
        }
        let header = [
            "k",
            "sup_pk",
            "argmax_point",
            "lo",
            "hi",
            "sharp",
            "k_maximal_point",
            "model_consideration_probability",
            "witness_consideration_probability",
        ];
        Ok(AnalysisOutput { csv: csv(&header, &rows), json: json!({ "alternatives": items }), plot: None })
    }

    fn discontinuity(&self, k: usize, scales: &[Value], step: Option<&Value>) -> Result<AnalysisOutput> {
        let m = require_model(&self.loaded, "discontinuity")?;
        alternatives(Some(k), self.k_count())?;
        let step: T = match step {
            Some(v) => number(v, "discontinuity step")?,
            None => T::one(),
        };
        let scales = scales.iter().map(|v| number::<T>(v, "discontinuity scale")).collect::<Result<Vec<_>>>()?;
        let rects = scales
            .iter()
            .map(|s| {
                let axis = axis_values(&-s.clone(), s, &step)?;
                UtilityGrid::rectangular(&vec![axis; self.k_count()])
            })
            .collect::<arum_core::Result<Vec<_>>>()?;
        let table = discontinuity_experiment(m, &rects, k)?;
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .zip(&scales)
            .map(|(r, s)| {
                vec![
                    r.index.to_string(),
                    s.repr(),
                    r.grid_points.to_string(),
                    r.sup_pk.repr(),
                    r.interval.lo.repr(),
                    r.interval.hi.repr(),
                    r.width.repr(),
                ]
            })
            .collect();
        let plot_rows: Vec<Vec<String>> =
            table.rows.iter().zip(&scales).map(|(r, s)| vec![s.repr(), r.sup_pk.repr(), r.width.repr()]).collect();
        let mut j = serde_json::to_value(&table).expect("table serialises");
        j["scales"] = Value::Array(scales.iter().map(sv).collect());
        j["step"] = sv(&step);
        Ok(AnalysisOutput {
            csv: csv(&["index", "s", "grid_points", "sup_pk", "lo", "hi", "width"], &rows),
            json: j,
            plot: Some(csv(&["s", "sup_pk", "width"], &plot_rows)),
        })
    }

    fn counterfactual(
        &self,
        k: usize,
        u_c: &[Value],
        atom_grid: &str,
        classes: Option<&[ModelClass]>,
    ) -> Result<AnalysisOutput> {
        alternatives(Some(k), self.k_count())?;
        let u_c: UtilityPoint<T> = point(u_c, "u_c")?;
        if u_c.dim() != self.k_count() {
            return Err(CliError::Validation(format!(
                "u_c has {} coordinates, expected {}",
                u_c.dim(),
                self.k_count()
            )));
        }
        let classes = classes.unwrap_or(&[ModelClass::Arum, ModelClass::ArumE, ModelClass::ArumCs]);
        let generator_value = match self.loaded.model() {
            Some(m) => Some(m.choice_probabilities(&u_c)?.get(k).clone()),
            None => None,
        };
        let mut rows = Vec::new();
        let mut items = Vec::new();
        for &class in classes {
            let family = parse_atom_family::<T>(atom_grid, self.k_count(), class)?;
            let problem = LpCounterfactualProblem {
                field: self.field.clone(),
                u_c: u_c.clone(),
                atom_family: family,
                model_class: class,
            };
            let rep = lp_counterfactual_bounds(&problem, k)?;
            rows.push(vec![
                class.as_str().to_string(),
                k.to_string(),
                rep.interval.lo.repr(),
                rep.interval.hi.repr(),
                problem.atom_family.len().to_string(),
                rep.kept_atoms.len().to_string(),
                rep.excluded_ties.to_string(),
                rep.constraint_rank.to_string(),
                generator_value.as_ref().map(Scalar::repr).unwrap_or_default(),
            ]);
            let support = |w: &[T]| -> Vec<Value> {
                rep.kept_atoms
                    .iter()
                    .zip(w)
                    .filter(|(_, w)| **w > T::zero())
                    .map(|(&i, w)| json!({ "atom": candidate_repr(&problem.atom_family[i]), "weight": sv(w) }))
                    .collect()
            };
            items.push(json!({
                "model_class": class.as_str(),
                "interval": serde_json::to_value(&rep.interval).expect("interval serialises"),
                "family_size": problem.atom_family.len(),
                "kept_atoms": rep.kept_atoms.len(),
                "excluded_ties": rep.excluded_ties,
                "constraint_rank": rep.constraint_rank,
                "min_support": support(&rep.min_weights),
                "max_support": support(&rep.max_weights),
            }));
        }
        let header = [
            "model_class",
            "k",
            "lo",
            "hi",
            "family_size",
            "kept_atoms",
            "excluded_ties",
            "constraint_rank",
            "generator_pk",
        ];
        let j = json!({
            "k": k,
            "u_c": u_c.repr(),
            "atom_grid": atom_grid,
            "generator_pk": generator_value.as_ref().map(sv).unwrap_or(Value::Null),
            "bounds": items,
        });
        Ok(AnalysisOutput { csv: csv(&header, &rows), json: j, plot: None })
    }

    fn attention(&self, k: Option<usize>) -> Result<AnalysisOutput> {
        let nu = self.loaded.model().map(to_cs);
        let mut rows = Vec::new();
        let mut plot_rows = Vec::new();
        let mut items = Vec::new();
        for k in alternatives(k, self.k_count())? {
            let rep = attention_max_change_set(&self.field, k, nu.as_ref())?;
            let realized = rep.realized_max_change();
            rows.push(vec![
                k.to_string(),
                rep.lower.repr(),
                rep.upper.repr(),
                realized.as_ref().map(Scalar::repr).unwrap_or_default(),
            ]);
            for (u, c) in &rep.per_point_change {
                plot_rows.push(vec![k.to_string(), u.repr(), c.repr()]);
            }
            items.push(json!({
                "k": k,
                "lower": sv(&rep.lower),
                "upper": sv(&rep.upper),
                "realized_max_change": realized.as_ref().map(sv).unwrap_or(Value::Null),
                "per_point_change": rep.per_point_change.iter()
                    .map(|(u, c)| json!({ "point": u.repr(), "change": sv(c) }))
                    .collect::<Vec<_>>(),
                "witness": rep.witness.map(|w| model_json(&Model::ArumCs(w))).unwrap_or(Value::Null),
            }));
        }
        Ok(AnalysisOutput {
            csv: csv(&["k", "lower", "upper", "realized_max_change"], &rows),
            json: json!({ "alternatives": items }),
            plot: Some(csv(&["k", "point", "change"], &plot_rows)),
        })
    }

    fn welfare(&self, a: &Analysis) -> Result<AnalysisOutput> {
        let Analysis::Welfare {
            u,
            u_tilde,
            panels,
            k,
            target_gain,
            witness_point,
            extremely_attractive,
            envelope_step,
            ..
        } = a
        else {
            unreachable!("dispatched on kind")
        };
        let m = require_model(&self.loaded, "welfare")?;
        let u: UtilityPoint<T> = point(u, "u")?;
        let ut: UtilityPoint<T> = point(u_tilde, "u_tilde")?;
        for p in [&u, &ut] {
            if p.dim() != self.k_count() {
                return Err(CliError::Validation(format!(
                    "welfare point has {} coordinates, expected {}",
                    p.dim(),
                    self.k_count()
                )));
            }
        }
        let panels = panels.unwrap_or(DEFAULT_PANELS);
        if panels == 0 {
            return Err(CliError::Validation("panels must be positive".into()));
        }
        let h: T =
            number(envelope_step.as_ref().unwrap_or(&Value::String(DEFAULT_ENVELOPE_STEP.into())), "envelope_step")?;
        let (uf, utf) = (UtilityPoint::new(u.to_f64())?, UtilityPoint::new(ut.to_f64())?);
        let exact = welfare_change_exact(m, &u, &ut)?;
        let path = model_path_integral(m, &u, &ut, panels)?;
        let uniform = welfare_change_path_integral(model_evaluator(m), &uf, &utf, panels)?;
        let breaks = segment_breakpoints(m, &u, &ut)?;
        let env_u = envelope_check(m, &u, &h)?;
        let env_ut = envelope_check(m, &ut, &h)?;
        let mut rows = vec![
            vec!["delta_exact".into(), String::new(), exact.repr()],
            vec!["delta_path_integral".into(), String::new(), path.repr()],
            vec!["path_abs_error".into(), String::new(), (path - exact.to_f64()).abs().repr()],
            vec!["delta_path_integral_uniform".into(), String::new(), uniform.repr()],
            vec!["panels".into(), String::new(), panels.to_string()],
            vec!["breakpoints".into(), String::new(), breaks.len().to_string()],
            vec!["envelope_deviation_u".into(), String::new(), env_u.repr()],
            vec!["envelope_deviation_u_tilde".into(), String::new(), env_ut.repr()],
        ];
        let mut sets = Vec::new();
        let mut witness_json = Value::Null;
        for kk in alternatives(*k, self.k_count())? {
            let set = attention_welfare_set(&self.field, kk, *extremely_attractive)?;
            rows.push(vec!["attention_welfare_set".into(), kk.to_string(), set.to_string()]);
            sets.push(json!({ "k": kk, "set": serde_json::to_value(&set).expect("set serialises"), "display": set.to_string() }));
            if k.is_some() && matches!(set, WelfareSet::UnboundedAbove(_)) {
                let c: T =
                    number(target_gain.as_ref().unwrap_or(&Value::String(DEFAULT_TARGET_GAIN.into())), "target_gain")?;
                let at: UtilityPoint<T> = match witness_point {
                    Some(p) => point(p, "witness_point")?,
                    None => u.clone(),
                };
                let w = unbounded_welfare_witness(&to_cs(m), self.grid(), kk, &at, &c)?;
                for (name, v) in [
                    ("witness_gamma", &w.gamma),
                    ("witness_shift", &w.shift),
                    ("witness_target_gain", &w.target_gain),
                    ("witness_guaranteed_gain", &w.guaranteed_gain),
                    ("witness_achieved_gain", &w.achieved_gain),
                ] {
                    rows.push(vec![name.into(), kk.to_string(), v.repr()]);
                }
                witness_json = json!({
                    "k": kk,
                    "point": at.repr(),
                    "gamma": sv(&w.gamma),
                    "base_shift": sv(&w.base_shift),
                    "shift": sv(&w.shift),
                    "target_gain": sv(&w.target_gain),
                    "guaranteed_gain": sv(&w.guaranteed_gain),
                    "achieved_gain": sv(&w.achieved_gain),
                    "used_companion": w.used_companion,
                    "field_unchanged": choice_prob_field(&w.witness, self.grid())? == self.field,
                    "model": model_json(&Model::ArumCs(w.witness)),
                });
            }
        }
        let samples = integrand_samples(model_evaluator(m), &uf, &utf, DEFAULT_PLOT_SAMPLES)?;
        let plot_rows: Vec<Vec<String>> = samples.iter().map(|(t, v)| vec![t.repr(), v.repr()]).collect();
        let j = json!({
            "u": u.repr(),
            "u_tilde": ut.repr(),
            "delta_exact": sv(&exact),
            "delta_path_integral": path.repr(),
            "delta_path_integral_uniform": uniform.repr(),
            "panels": panels,
            "breakpoints": breaks.iter().map(sv).collect::<Vec<_>>(),
            "envelope_step": sv(&h),
            "envelope_deviation": { "u": sv(&env_u), "u_tilde": sv(&env_ut) },
            "attention_welfare_sets": sets,
            "witness": witness_json,
        });
        Ok(AnalysisOutput {
            csv: csv(&["quantity", "k", "value"], &rows),
            json: j,
            plot: Some(csv(&["t", "integrand"], &plot_rows)),
        })
    }

    fn diagnostics(&self) -> Result<AnalysisOutput> {
        let rep = proper_subset_diagnostics(&self.field)?;
        let subset_repr = |s: &[usize]| s.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let rows: Vec<Vec<String>> = rep
            .subsets
            .iter()
            .map(|d| vec![subset_repr(&d.subset), d.subset.len().to_string(), d.sup_sum.repr()])
            .collect();
        let plot_rows: Vec<Vec<String>> =
            rep.subsets.iter().map(|d| vec![subset_repr(&d.subset), d.sup_sum.repr()]).collect();
        let sups: Vec<Value> =
            (0..self.k_count()).map(|k| json!({ "k": k, "sup_pk": sv(&sup_choice_prob(&self.field, k).0) })).collect();
        let j = json!({
            "subsets": serde_json::to_value(&rep.subsets).expect("subsets serialise"),
            "sup_pk": sups,
            "consistent_with_full_consideration": if rep.consistent_with_full_consideration { "yes" } else { "no" },
        });
        Ok(AnalysisOutput {
            csv: csv(&["subset", "size", "sup_sum"], &rows),
            json: j,
            plot: Some(csv(&["subset", "sup_sum"], &plot_rows)),
        })
    }
}

fn candidate_repr<T: Scalar>(a: &CandidateAtom<T>) -> String {
    a.repr()
}

fn run_typed<T: Scalar>(scenario: &Scenario, model_text: Option<&str>, seed: u64) -> Result<Vec<Artifact>> {
    let ctx = Context::new(scenario.load::<T>(model_text)?, seed)?;
    let mut out = Vec::new();
    for (i, a) in scenario.analyses.iter().enumerate() {
        let stem = format!("{:02}_{}", i + 1, a.kind());
        let res = ctx.run(a)?;
        let mut j = json!({
            "schema_version": OUTPUT_SCHEMA_VERSION,
            "analysis": a.kind(),
            "index": i + 1,
        });
        if let (Value::Object(dst), Value::Object(src)) = (&mut j, res.json) {
            dst.extend(src);
        }
        out.push(Artifact { name: format!("{stem}.csv"), bytes: res.csv.into_bytes() });
        out.push(Artifact { name: format!("{stem}.json"), bytes: pretty(&j).into_bytes() });
        if a.wants_plot() {
            if let Some(p) = res.plot {
                out.push(Artifact { name: format!("{stem}_plot.csv"), bytes: p.into_bytes() });
            }
        }
    }
    Ok(out)
}

/// Parses, validates and loads without running any analysis.
pub fn validate_scenario_file(path: &Path, opts: &RunOptions) -> Result<Scenario> {
    let (scenario, _, model_text) = read_inputs(path)?;
    let arithmetic = opts.arithmetic.unwrap_or(scenario.arithmetic);
    let text = model_text.as_ref().map(|(_, t)| t.as_str());
    match arithmetic {
        Arithmetic::Rational => scenario.load::<Rational>(text).map(|_| ())?,
        Arithmetic::Float => scenario.load::<f64>(text).map(|_| ())?,
    }
    Ok(scenario)
}

type Inputs = (Scenario, Vec<u8>, Option<(PathBuf, String)>);

fn read_inputs(path: &Path) -> Result<Inputs> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse(format!("scenario is not UTF-8: {e}")))?;
    let scenario = Scenario::from_json(text)?;
    scenario.check_structure()?;
    let base = path.parent().unwrap_or(Path::new("."));
    let model_text = scenario.model_file_text(base)?;
    Ok((scenario, bytes, model_text))
}

/// Output directory precedence: flag, scenario (relative to the scenario
/// file), then the default from the environment, then [`DEFAULT_OUTPUT_DIR`].
fn resolve_output_dir(path: &Path, scenario: &Scenario, opts: &RunOptions) -> PathBuf {
    if let Some(d) = &opts.output_dir {
        return d.clone();
    }
    if let Some(d) = &scenario.output_dir {
        return path.parent().unwrap_or(Path::new(".")).join(d);
    }
    opts.default_output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Runs every analysis, then writes artifacts and the manifest.
pub fn run_scenario_file(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let (scenario, scenario_bytes, model_text) = read_inputs(path)?;
    let arithmetic = opts.arithmetic.unwrap_or(scenario.arithmetic);
    let seed = opts.seed.unwrap_or(scenario.seed);
    let text = model_text.as_ref().map(|(_, t)| t.as_str());
    let mut artifacts = match arithmetic {
        Arithmetic::Rational => run_typed::<Rational>(&scenario, text, seed)?,
        Arithmetic::Float => run_typed::<f64>(&scenario, text, seed)?,
    };
    let mut hasher = Sha256::new();
    hasher.update(&scenario_bytes);
    if let Some((_, t)) = &model_text {
        hasher.update(t.as_bytes());
    }
    let manifest = json!({
        "schema_version": OUTPUT_SCHEMA_VERSION,
        "scenario": scenario.name,
        "library_version": arum_core::VERSION,
        "inputs_sha256": hex::encode(hasher.finalize()),
        "seed": seed,
        "arithmetic": arithmetic.as_str(),
        "files": artifacts.iter()
            .map(|a| json!({ "path": a.name, "sha256": sha256_hex(&a.bytes), "bytes": a.bytes.len() }))
            .collect::<Vec<_>>(),
    });
    artifacts.push(Artifact { name: MANIFEST_NAME.into(), bytes: pretty(&manifest).into_bytes() });

    let dir = resolve_output_dir(path, &scenario, opts);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    for a in &artifacts {
        let p = dir.join(&a.name);
        std::fs::write(&p, &a.bytes).map_err(|e| CliError::io(&p, e))?;
    }
    Ok(RunOutcome { output_dir: dir, artifacts })
}
