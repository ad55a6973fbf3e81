//! Value Change Dump writer.

use std::fmt::Write;

use super::trace::Trace;

/// Short identifier code for the `i`th variable: base-94 over `!`..`~`.
fn code(mut i: usize) -> String {
    let mut s = String::new();
    loop {
        s.push((b'!' + (i % 94) as u8) as char);
        i /= 94;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s
}

fn var_name(label: &str) -> String {
    label.chars().map(|c| if c.is_whitespace() || c == '$' { '_' } else { c }).collect()
}

/// Renders a trace as VCD text with a 1 ns timescale. Output depends only
/// on the trace, so equal traces give identical bytes.
pub fn export_vcd(trace: &Trace) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("$version dclab ");
    out.push_str(env!("CARGO_PKG_VERSION"));
    out.push_str(" $end\n$timescale 1ns $end\n$scope module top $end\n");
    let codes: Vec<String> = (0..trace.signals.len()).map(code).collect();
    for (s, c) in trace.signals.iter().zip(&codes) {
        let _ = writeln!(out, "$var wire 1 {c} {} $end", var_name(&s.label));
    }
    out.push_str("$upscope $end\n$enddefinitions $end\n#0\n$dumpvars\n");
    for (s, c) in trace.signals.iter().zip(&codes) {
        let v = s.changes.first().map_or('z', |(_, v)| v.to_char().to_ascii_lowercase());
        let _ = writeln!(out, "{v}{c}");
    }
    out.push_str("$end\n");

    // Merge the remaining changes by time, keeping signal order within a time.
    let mut events: Vec<(u64, usize, char)> = Vec::new();
    for (i, s) in trace.signals.iter().enumerate() {
        for &(t, v) in s.changes.iter().skip(1) {
            events.push((t, i, v.to_char().to_ascii_lowercase()));
        }
    }
    events.sort_unstable();
    let mut current = None;
    for (t, i, v) in events {
        if current != Some(t) {
            let _ = writeln!(out, "#{t}");
            current = Some(t);
        }
        let _ = writeln!(out, "{v}{}", codes[i]);
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::LogicValue::*;
    use crate::sim::trace::TraceSignal;

    #[test]
    fn codes_are_unique() {
        let all: std::collections::BTreeSet<String> = (0..20_000).map(code).collect();
        assert_eq!(all.len(), 20_000);
        assert_eq!(code(0), "!");
        assert_eq!(code(93), "~");
        assert_eq!(code(94), "!!");
    }

    #[test]
    fn single_constant_signal() {
        let t = Trace {
            horizon_ns: 100,
            signals: vec![TraceSignal { label: "a".into(), id: "a".into(), changes: vec![(0, Zero)] }],
        };
        let text = String::from_utf8(export_vcd(&t)).unwrap();
        assert_eq!(text.matches('#').count(), 1);
        assert!(text.contains("#0\n$dumpvars\n0!\n$end\n"));
    }

    #[test]
    fn x_and_z_are_lowercase() {
        let t = Trace {
            horizon_ns: 20,
            signals: vec![TraceSignal { label: "a b".into(), id: "a".into(), changes: vec![(0, X), (5, Z), (10, One)] }],
        };
        let text = String::from_utf8(export_vcd(&t)).unwrap();
        assert!(text.contains("$var wire 1 ! a_b $end"));
        assert!(text.contains("x!\n$end\n#5\nz!\n#10\n1!\n"));
    }
}
