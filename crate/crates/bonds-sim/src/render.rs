//! Render trace records for people. The JSONL form in [`crate::trace`] is
//! the canonical one; these are lossy views for reading a run at a glance.

use std::io::{self, Write};

use serde_json::Value;

use crate::trace::{write_record, TraceRecord};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum OutputFormat {
    #[default]
    Jsonl,
    Table,
    Narrative,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "table" => Ok(OutputFormat::Table),
            "narrative" => Ok(OutputFormat::Narrative),
            other => Err(format!(
                "unknown format: {other} (expected jsonl, table or narrative)"
            )),
        }
    }
}

pub fn write_rendered(
    w: &mut impl Write,
    record: &TraceRecord,
    format: OutputFormat,
) -> io::Result<()> {
    match format {
        OutputFormat::Jsonl => write_record(w, record),
        OutputFormat::Table => {
            writeln!(
                w,
                "{:>5}  {:>5}  {:<10}  {:<24}  {}",
                record.seq,
                record.day,
                record.actor,
                tagged(record),
                summary(record)
            )
        }
        OutputFormat::Narrative => writeln!(w, "[{:>5}] {}", record.seq, sentence(record)),
    }
}

pub fn table_header(w: &mut impl Write) -> io::Result<()> {
    writeln!(
        w,
        "{:>5}  {:>5}  {:<10}  {:<24}  result",
        "seq", "day", "actor", "action"
    )
}

fn tagged(record: &TraceRecord) -> String {
    match &record.label {
        Some(label) => format!("{} [{}]", record.action, label),
        None => record.action.clone(),
    }
}

fn summary(record: &TraceRecord) -> String {
    if let Some(err) = record.result.get("error").and_then(Value::as_str) {
        return format!("FAILED: {err}");
    }
    match record.action.as_str() {
        "mint" => format!(
            "{} bonds maturing day {}",
            record.params["count"], record.params["maturity"]
        ),
        "advance_date" | "advance_all" => format!("to day {}", record.params["to"]),
        "propose" => format!(
            "#{} to {}: give {} want {}",
            record.result["proposal"],
            record.params["to"].as_str().unwrap_or("?"),
            lots(&record.params["give"]),
            lots(&record.params["want"])
        ),
        "accept" | "reject" => format!(
            "#{} from {}",
            record.result["proposal"],
            record.params["from"].as_str().unwrap_or("?")
        ),
        "deliver" => format!(
            "#{} {} ({})",
            record.params["proposal"],
            record.result["response"].as_str().unwrap_or("?"),
            record.result["class"].as_str().unwrap_or("?")
        ),
        "settle" => format!(
            "#{} {}",
            record.params["proposal"],
            record.result["outcome"].as_str().unwrap_or("?")
        ),
        "escrow_tick" => escrow_events(&record.result["events"]),
        "draw" | "repay" => {
            format!(
                "case {} amount {}",
                record.params["case"], record.params["amount"]
            )
        }
        "instrument" => record.params["spec"]["kind"]
            .as_str()
            .unwrap_or("?")
            .to_string(),
        action if action.starts_with("assert_") => "ok".to_string(),
        action if action.starts_with("open_") || action == "deposit_escrow" => {
            format!("case {}", record.result["case"])
        }
        _ => terse(&record.result),
    }
}

fn sentence(record: &TraceRecord) -> String {
    if let Some(err) = record.result.get("error").and_then(Value::as_str) {
        return format!(
            "day {}: {} tried to {} but failed: {err}",
            record.day, record.actor, record.action
        );
    }
    let a = &record.actor;
    match record.action.as_str() {
        "mint" => format!(
            "day {}: {a} mints {} bonds maturing on day {}",
            record.day, record.params["count"], record.params["maturity"]
        ),
        "advance_date" => format!(
            "day {}: {a} advances to day {}",
            record.day, record.params["to"]
        ),
        "advance_all" => format!("everyone advances to day {}", record.params["to"]),
        "propose" => format!(
            "day {}: {a} proposes trade #{} to {}: give {}, want {}",
            record.day,
            record.result["proposal"],
            record.params["to"].as_str().unwrap_or("?"),
            lots(&record.params["give"]),
            lots(&record.params["want"])
        ),
        "accept" => format!(
            "day {}: {a} accepts trade #{} from {}",
            record.day,
            record.result["proposal"],
            record.params["from"].as_str().unwrap_or("?")
        ),
        "reject" => format!(
            "day {}: {a} rejects trade #{} from {}",
            record.day,
            record.result["proposal"],
            record.params["from"].as_str().unwrap_or("?")
        ),
        "deliver" => format!(
            "day {}: trade #{} reaches {a}, who answers: {} ({})",
            record.day,
            record.params["proposal"],
            record.result["response"].as_str().unwrap_or("?"),
            record.result["class"].as_str().unwrap_or("?")
        ),
        "settle" => format!(
            "day {}: {a} settles trade #{}: {}",
            record.day,
            record.params["proposal"],
            record.result["outcome"].as_str().unwrap_or("?")
        ),
        "escrow_tick" => format!(
            "day {}: the escrow desk acts: {}",
            record.day,
            escrow_events(&record.result["events"])
        ),
        "draw" => format!(
            "the borrower draws {} on case {}",
            record.params["amount"], record.params["case"]
        ),
        "repay" => format!(
            "the borrower repays {} on case {}",
            record.params["amount"], record.params["case"]
        ),
        "instrument" => format!(
            "day {}: {a} sets up a {}",
            record.day,
            record.params["spec"]["kind"]
                .as_str()
                .unwrap_or("?")
                .replace('_', " ")
        ),
        action if action.starts_with("assert_") => {
            format!(
                "day {}: check passes: {}",
                record.day,
                action.replace('_', " ")
            )
        }
        action if action.starts_with("open_") || action == "deposit_escrow" => format!(
            "day {}: {a} opens escrow case {}{}",
            record.day,
            record.result["case"],
            record
                .label
                .as_ref()
                .map(|l| format!(" ({l})"))
                .unwrap_or_default()
        ),
        action => format!(
            "day {}: {a} does {action}: {}",
            record.day,
            terse(&record.result)
        ),
    }
}

fn lots(value: &Value) -> String {
    let Some(items) = value.as_array() else {
        return "?".to_string();
    };
    if items.is_empty() {
        return "nothing".to_string();
    }
    items
        .iter()
        .map(|l| {
            format!(
                "{}x({}@{})",
                l["count"],
                l["issuer"].as_str().unwrap_or("?"),
                l["maturity"]
            )
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn escrow_events(value: &Value) -> String {
    let Some(items) = value.as_array() else {
        return "?".to_string();
    };
    items
        .iter()
        .map(|e| {
            let kind = e["kind"]
                .as_object()
                .and_then(|o| o.keys().next().cloned())
                .or_else(|| e["kind"].as_str().map(String::from))
                .unwrap_or_else(|| "?".to_string());
            format!("case {}: {kind}", e["case"])
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn terse(value: &Value) -> String {
    let s = value.to_string();
    if s.len() > 60 {
        format!("{}...", &s[..57])
    } else {
        s
    }
}
