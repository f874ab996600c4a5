//! OpenQASM 2.0 subset: one `qreg`, any number of `creg`s, the single-qubit
//! gates of [`GateKind`], `cx`, `measure` and `barrier` (ignored).

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{CircuitError, Gate, GateKind, Instruction, LogicalCircuit, ProgramQubit};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QasmError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported construct '{construct}'")]
    Unsupported { line: usize, construct: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

struct Statement {
    line: usize,
    text: String,
}

/// Split source into `;`-terminated statements, dropping `//` comments and
/// remembering the line each statement starts on.
fn statements(source: &str) -> Result<Vec<Statement>, QasmError> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start_line = 1;
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split("//").next().unwrap_or("");
        for ch in line.chars() {
            if current.trim().is_empty() && !ch.is_whitespace() {
                start_line = line_no;
            }
            if ch == ';' {
                out.push(Statement { line: start_line, text: current.trim().to_string() });
                current.clear();
            } else {
                current.push(ch);
            }
        }
        current.push(' ');
    }
    if !current.trim().is_empty() {
        return Err(QasmError::Syntax { line: start_line, message: "missing ';' at end of statement".into() });
    }
    Ok(out)
}

struct Parser {
    qreg: Option<(String, usize)>,
    cregs: HashMap<String, (usize, usize)>,
    num_clbits: usize,
    instructions: Vec<Instruction>,
}

fn syntax(line: usize, message: impl Into<String>) -> QasmError {
    QasmError::Syntax { line, message: message.into() }
}

/// `name[idx]` or bare `name`.
fn parse_operand(line: usize, text: &str) -> Result<(String, Option<usize>), QasmError> {
    let text = text.trim();
    match text.find('[') {
        Some(open) => {
            let close = text.rfind(']').filter(|&c| c > open).ok_or_else(|| syntax(line, format!("malformed operand '{text}'")))?;
            if !text[close + 1..].trim().is_empty() {
                return Err(syntax(line, format!("malformed operand '{text}'")));
            }
            let idx = text[open + 1..close].trim().parse::<usize>().map_err(|_| syntax(line, format!("bad index in '{text}'")))?;
            Ok((text[..open].trim().to_string(), Some(idx)))
        }
        None if is_identifier(text) => Ok((text.to_string(), None)),
        None => Err(syntax(line, format!("malformed operand '{text}'"))),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_declaration(line: usize, rest: &str) -> Result<(String, usize), QasmError> {
    match parse_operand(line, rest)? {
        (name, Some(size)) if is_identifier(&name) => Ok((name, size)),
        _ => Err(syntax(line, format!("bad register declaration '{rest}'"))),
    }
}

impl Parser {
    fn qubits(&self, line: usize, text: &str) -> Result<Vec<ProgramQubit>, QasmError> {
        let (reg, size) = self.qreg.as_ref().ok_or_else(|| syntax(line, "gate used before qreg declaration"))?;
        let (name, idx) = parse_operand(line, text)?;
        if &name != reg {
            return Err(syntax(line, format!("unknown quantum register '{name}'")));
        }
        match idx {
            Some(i) if i < *size => Ok(vec![ProgramQubit(i)]),
            Some(i) => Err(syntax(line, format!("index {i} out of range for {reg}[{size}]"))),
            None => Ok((0..*size).map(ProgramQubit).collect()),
        }
    }

    fn clbits(&self, line: usize, text: &str) -> Result<Vec<usize>, QasmError> {
        let (name, idx) = parse_operand(line, text)?;
        let &(offset, size) = self.cregs.get(&name).ok_or_else(|| syntax(line, format!("unknown classical register '{name}'")))?;
        match idx {
            Some(i) if i < size => Ok(vec![offset + i]),
            Some(i) => Err(syntax(line, format!("index {i} out of range for {name}[{size}]"))),
            None => Ok((offset..offset + size).collect()),
        }
    }

    fn statement(&mut self, stmt: &Statement) -> Result<(), QasmError> {
        let line = stmt.line;
        let text = stmt.text.as_str();
        if text.is_empty() {
            return Ok(());
        }
        let head_end = text.find(|c: char| c.is_whitespace() || c == '(').unwrap_or(text.len());
        let head = &text[..head_end];
        let rest = text[head_end..].trim();
        match head {
            "OPENQASM" => {
                if !rest.starts_with('2') {
                    return Err(QasmError::Unsupported { line, construct: format!("OPENQASM {rest}") });
                }
            }
            "include" => {}
            "qreg" => {
                if self.qreg.is_some() {
                    return Err(QasmError::Unsupported { line, construct: "multiple qreg".into() });
                }
                self.qreg = Some(parse_declaration(line, rest)?);
            }
            "creg" => {
                let (name, size) = parse_declaration(line, rest)?;
                if self.cregs.insert(name.clone(), (self.num_clbits, size)).is_some() {
                    return Err(syntax(line, format!("creg '{name}' declared twice")));
                }
                self.num_clbits += size;
            }
            "barrier" => {}
            "measure" => {
                let (src, dst) = rest.split_once("->").ok_or_else(|| syntax(line, "measure needs '->'"))?;
                let qs = self.qubits(line, src)?;
                let cs = self.clbits(line, dst)?;
                if qs.len() != cs.len() {
                    return Err(syntax(line, "measure register sizes differ"));
                }
                self.instructions.extend(qs.into_iter().zip(cs).map(|(qubit, clbit)| Instruction::Measure { qubit, clbit }));
            }
            "cx" | "CX" => {
                let args: Vec<&str> = rest.split(',').collect();
                if args.len() != 2 {
                    return Err(syntax(line, "cx takes two operands"));
                }
                let (c, t) = (self.qubits(line, args[0])?, self.qubits(line, args[1])?);
                if c.len() != 1 || t.len() != 1 {
                    return Err(QasmError::Unsupported { line, construct: "register-wide cx".into() });
                }
                self.instructions.push(Instruction::TwoQubit { control: c[0], target: t[0] });
            }
            _ => {
                let Some(kind) = GateKind::from_name(head) else {
                    return Err(QasmError::Unsupported { line, construct: head.to_string() });
                };
                let (params, operands) = if rest.starts_with('(') {
                    let close = matching_paren(rest).ok_or_else(|| syntax(line, "unbalanced parentheses"))?;
                    let params = split_top_level(&rest[1..close])
                        .into_iter()
                        .map(|p| eval_expr(p).map_err(|m| syntax(line, m)))
                        .collect::<Result<Vec<f64>, _>>()?;
                    (params, rest[close + 1..].trim())
                } else {
                    (Vec::new(), rest)
                };
                if params.len() != kind.num_params() {
                    return Err(syntax(line, format!("{head} expects {} parameters, got {}", kind.num_params(), params.len())));
                }
                if operands.contains(',') {
                    return Err(syntax(line, format!("{head} takes one operand")));
                }
                for qubit in self.qubits(line, operands)? {
                    self.instructions.push(Instruction::OneQubit { gate: Gate::with_params(kind, params.clone()), qubit });
                }
            }
        }
        Ok(())
    }
}

fn matching_paren(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Arithmetic over numbers and `pi` with `+ - * / ^` and parentheses.
fn eval_expr(src: &str) -> Result<f64, String> {
    let tokens = tokenize(src)?;
    let mut pos = 0;
    let value = expr(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(format!("unexpected trailing input in '{}'", src.trim()));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(text.parse().map_err(|_| format!("bad number '{text}'"))?));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word == "pi" {
                out.push(Tok::Num(std::f64::consts::PI));
            } else {
                return Err(format!("unknown identifier '{word}' in expression"));
            }
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character '{c}' in expression"));
        }
    }
    Ok(out)
}

fn expr(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    let mut v = term(t, pos)?;
    while let Some(Tok::Op(op @ ('+' | '-'))) = t.get(*pos) {
        *pos += 1;
        let rhs = term(t, pos)?;
        v = if *op == '+' { v + rhs } else { v - rhs };
    }
    Ok(v)
}

fn term(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    let mut v = unary(t, pos)?;
    while let Some(Tok::Op(op @ ('*' | '/'))) = t.get(*pos) {
        *pos += 1;
        let rhs = unary(t, pos)?;
        v = if *op == '*' { v * rhs } else { v / rhs };
    }
    Ok(v)
}

fn unary(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    match t.get(*pos) {
        Some(Tok::Op('-')) => {
            *pos += 1;
            Ok(-unary(t, pos)?)
        }
        Some(Tok::Op('+')) => {
            *pos += 1;
            unary(t, pos)
        }
        _ => power(t, pos),
    }
}

fn power(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    let base = atom(t, pos)?;
    if let Some(Tok::Op('^')) = t.get(*pos) {
        *pos += 1;
        let exp = unary(t, pos)?;
        return Ok(base.powf(exp));
    }
    Ok(base)
}

fn atom(t: &[Tok], pos: &mut usize) -> Result<f64, String> {
    match t.get(*pos) {
        Some(Tok::Num(v)) => {
            *pos += 1;
            Ok(*v)
        }
        Some(Tok::Op('(')) => {
            *pos += 1;
            let v = expr(t, pos)?;
            if t.get(*pos) != Some(&Tok::Op(')')) {
                return Err("missing ')'".into());
            }
            *pos += 1;
            Ok(v)
        }
        other => Err(format!("unexpected token {other:?} in expression")),
    }
}

/// Parse the accepted OpenQASM 2.0 subset. The circuit is named `name`.
pub fn parse_qasm(name: &str, source: &str) -> Result<LogicalCircuit, QasmError> {
    let mut parser = Parser { qreg: None, cregs: HashMap::new(), num_clbits: 0, instructions: Vec::new() };
    for stmt in statements(source)? {
        parser.statement(&stmt)?;
    }
    let num_qubits = parser.qreg.map(|(_, n)| n).unwrap_or(0);
    Ok(LogicalCircuit::new(name, num_qubits, parser.num_clbits, parser.instructions)?)
}

/// Serialize to the same subset, with registers named `q` and `c`.
pub fn write_qasm(circuit: &LogicalCircuit) -> String {
    let mut out = String::new();
    writeln!(out, "// {}", circuit.name()).unwrap();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    writeln!(out, "qreg q[{}];", circuit.num_qubits()).unwrap();
    if circuit.num_clbits() > 0 {
        writeln!(out, "creg c[{}];", circuit.num_clbits()).unwrap();
    }
    for instr in circuit.instructions() {
        match instr {
            Instruction::OneQubit { gate, qubit } => {
                out.push_str(gate.kind.name());
                if !gate.params.is_empty() {
                    let params: Vec<String> = gate.params.iter().map(|p| format!("{p:?}")).collect();
                    write!(out, "({})", params.join(",")).unwrap();
                }
                writeln!(out, " q[{}];", qubit.0).unwrap();
            }
            Instruction::TwoQubit { control, target } => writeln!(out, "cx q[{}],q[{}];", control.0, target.0).unwrap(),
            Instruction::Measure { qubit, clbit } => writeln!(out, "measure q[{}] -> c[{}];", qubit.0, clbit).unwrap(),
        }
    }
    out
}
