//! Table-driven stack machine giving toy program spaces total, fast
//! semantics: a program is a straight-line opcode sequence, each symbol maps
//! to one opcode, execution always halts after exactly one pass.

/// Result of running one program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineOutcome {
    /// Top of stack after the last opcode, or 0 for an empty stack.
    pub result: i64,
    pub max_depth: usize,
    pub final_depth: usize,
}

/// Symbols are 1-based alphabet values; anything above 8 is a no-op so
/// larger alphabets remain total.
///
/// 1 PUSH1, 2 PUSH2, 3 ADD, 4 MUL, 5 DUP, 6 POP, 7 SUB, 8 NEG.
pub fn run(program: &[u8]) -> MachineOutcome {
    let mut stack: Vec<i64> = Vec::with_capacity(program.len());
    let mut max_depth = 0;
    for &symbol in program {
        match symbol {
            1 => stack.push(1),
            2 => stack.push(2),
            3 => {
                let b = stack.pop().unwrap_or(0);
                let a = stack.pop().unwrap_or(0);
                stack.push(a.wrapping_add(b));
            }
            4 => {
                let b = stack.pop().unwrap_or(0);
                let a = stack.pop().unwrap_or(0);
                stack.push(a.wrapping_mul(b));
            }
            5 => {
                let top = stack.last().copied().unwrap_or(0);
                stack.push(top);
            }
            6 => {
                stack.pop();
            }
            7 => {
                let b = stack.pop().unwrap_or(0);
                let a = stack.pop().unwrap_or(0);
                stack.push(a.wrapping_sub(b));
            }
            8 => {
                let top = stack.pop().unwrap_or(0);
                stack.push(top.wrapping_neg());
            }
            _ => {}
        }
        max_depth = max_depth.max(stack.len());
    }
    MachineOutcome {
        result: stack.last().copied().unwrap_or(0),
        max_depth,
        final_depth: stack.len(),
    }
}
