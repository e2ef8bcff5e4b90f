//! JSON Lines codec for the event log.
//!
//! Each record carries `tick`, `seq`, `type` and `agent`, followed by the
//! type-specific keys in the fixed order `artefact`, `artefact_id`,
//! `attempts`, `class`, `strength`, `target`, `stored`. Absent keys are
//! omitted; `artefact` is `null` only for `ProducedEmpty`.

use creasim::agent::{EvalClass, Evaluation, UpdateTarget};
use creasim::society::{Event, EventKind};
use creasim::Artefact;
use serde_json::Value;

use crate::canonical::{format_g17, write_value};
use crate::error::CliError;

fn push_key(out: &mut String, key: &str) {
    out.push(',');
    out.push('"');
    out.push_str(key);
    out.push_str("\":");
}

fn push_artefact(out: &mut String, a: &Artefact) {
    let v = serde_json::to_value(a).expect("artefacts always serialize");
    push_key(out, "artefact");
    write_value(&v, out);
}

fn push_eval(out: &mut String, e: &Evaluation<f64>) {
    push_key(out, "class");
    out.push('"');
    out.push_str(e.class.symbol());
    out.push('"');
    push_key(out, "strength");
    out.push_str(&format_g17(e.strength));
}

pub fn encode(e: &Event<f64>) -> String {
    let mut out = format!("{{\"tick\":{},\"seq\":{},\"type\":\"{}\",\"agent\":{}", e.tick, e.seq, e.type_name(), e.agent);
    match &e.kind {
        EventKind::Generated { artefact, artefact_id, attempts, self_eval } => {
            push_artefact(&mut out, artefact);
            push_key(&mut out, "artefact_id");
            out.push_str(&artefact_id.to_string());
            push_key(&mut out, "attempts");
            out.push_str(&attempts.to_string());
            push_eval(&mut out, self_eval);
        }
        EventKind::ProducedEmpty { attempts } => {
            push_artefact(&mut out, &Artefact::Empty);
            push_key(&mut out, "attempts");
            out.push_str(&attempts.to_string());
        }
        EventKind::Observed { artefact_id, stored } => {
            push_key(&mut out, "artefact_id");
            out.push_str(&artefact_id.to_string());
            push_key(&mut out, "stored");
            out.push_str(if *stored { "true" } else { "false" });
        }
        EventKind::Evaluated { artefact_id, evaluation } => {
            push_key(&mut out, "artefact_id");
            out.push_str(&artefact_id.to_string());
            push_eval(&mut out, evaluation);
        }
        EventKind::Updated { artefact_id, target } => {
            push_key(&mut out, "artefact_id");
            out.push_str(&artefact_id.to_string());
            push_key(&mut out, "target");
            out.push('"');
            out.push_str(target.name());
            out.push('"');
        }
        EventKind::PCreative { artefact_id } | EventKind::HCreative { artefact_id } => {
            push_key(&mut out, "artefact_id");
            out.push_str(&artefact_id.to_string());
        }
    }
    out.push('}');
    out
}

pub fn encode_all(events: &[Event<f64>]) -> String {
    let mut s = String::new();
    for e in events {
        s.push_str(&encode(e));
        s.push('\n');
    }
    s
}

fn field<'a>(v: &'a Value, key: &str, line: usize) -> Result<&'a Value, CliError> {
    v.get(key).ok_or_else(|| CliError::Schema { path: format!("events.jsonl:{line}.{key}"), msg: "missing key".into() })
}

fn uint(v: &Value, key: &str, line: usize) -> Result<u64, CliError> {
    field(v, key, line)?
        .as_u64()
        .ok_or_else(|| CliError::Schema { path: format!("events.jsonl:{line}.{key}"), msg: "expected an unsigned integer".into() })
}

fn text<'a>(v: &'a Value, key: &str, line: usize) -> Result<&'a str, CliError> {
    field(v, key, line)?
        .as_str()
        .ok_or_else(|| CliError::Schema { path: format!("events.jsonl:{line}.{key}"), msg: "expected a string".into() })
}

fn eval(v: &Value, line: usize) -> Result<Evaluation<f64>, CliError> {
    let class = EvalClass::from_symbol(text(v, "class", line)?)
        .ok_or_else(|| CliError::Schema { path: format!("events.jsonl:{line}.class"), msg: "unknown class".into() })?;
    let strength = field(v, "strength", line)?
        .as_f64()
        .ok_or_else(|| CliError::Schema { path: format!("events.jsonl:{line}.strength"), msg: "expected a number".into() })?;
    Ok(Evaluation { class, strength })
}

pub fn decode(s: &str, line: usize) -> Result<Event<f64>, CliError> {
    let v: Value = serde_json::from_str(s)
        .map_err(|e| CliError::Schema { path: format!("events.jsonl:{line}"), msg: e.to_string() })?;
    let id = |v: &Value| uint(v, "artefact_id", line);
    let kind = match text(&v, "type", line)? {
        "Generated" => {
            let artefact: Artefact = serde_json::from_value(field(&v, "artefact", line)?.clone())
                .map_err(|e| CliError::Schema { path: format!("events.jsonl:{line}.artefact"), msg: e.to_string() })?;
            EventKind::Generated { artefact, artefact_id: id(&v)?, attempts: uint(&v, "attempts", line)? as u32, self_eval: eval(&v, line)? }
        }
        "ProducedEmpty" => EventKind::ProducedEmpty { attempts: uint(&v, "attempts", line)? as u32 },
        "Observed" => EventKind::Observed {
            artefact_id: id(&v)?,
            stored: field(&v, "stored", line)?.as_bool().ok_or_else(|| CliError::Schema {
                path: format!("events.jsonl:{line}.stored"),
                msg: "expected a boolean".into(),
            })?,
        },
        "Evaluated" => EventKind::Evaluated { artefact_id: id(&v)?, evaluation: eval(&v, line)? },
        "Updated" => EventKind::Updated {
            artefact_id: id(&v)?,
            target: UpdateTarget::from_name(text(&v, "target", line)?).ok_or_else(|| CliError::Schema {
                path: format!("events.jsonl:{line}.target"),
                msg: "unknown update target".into(),
            })?,
        },
        "PCreative" => EventKind::PCreative { artefact_id: id(&v)? },
        "HCreative" => EventKind::HCreative { artefact_id: id(&v)? },
        other => {
            return Err(CliError::Schema { path: format!("events.jsonl:{line}.type"), msg: format!("unknown event type {other:?}") })
        }
    };
    Ok(Event { tick: uint(&v, "tick", line)?, seq: uint(&v, "seq", line)?, agent: uint(&v, "agent", line)? as usize, kind })
}

pub fn decode_all(text: &str) -> Result<Vec<Event<f64>>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| decode(l, i + 1))
        .collect()
}
