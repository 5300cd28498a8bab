use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::automata::{Action, Automaton, Behavior, Signature};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Access {
    /// Separate atomic reads and writes; only `writers` may write.
    ReadWrite { writers: BTreeSet<usize> },
    /// Read-modify-write in a single atomic step.
    TestAndSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub access: Access,
    pub initial: i64,
}

/// One instruction of a process program. Each instruction touches at most
/// one register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    /// Input `try_i`: remainder to trying.
    Try,
    Write { reg: usize, value: i64 },
    /// Reads `reg`; jumps to `goto` when the value equals `equals`.
    ReadBranch { reg: usize, equals: i64, goto: usize },
    /// If `expect` is `None` or matches, stores `set` and falls through;
    /// otherwise jumps to `fail_goto`. One atomic step.
    TestAndSet { reg: usize, expect: Option<i64>, set: i64, fail_goto: usize },
    /// Output `crit_i`: trying to critical.
    Crit,
    /// Output `exit_i`: critical to exit.
    Exit,
    /// Output `rem_i`: exit to remainder; control returns to instruction 0.
    Rem,
    Goto(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    Remainder,
    Trying,
    Critical,
    Exit,
}

impl Region {
    fn code(self) -> i64 {
        self as i64
    }

    fn from_code(code: i64) -> Region {
        match code {
            0 => Region::Remainder,
            1 => Region::Trying,
            2 => Region::Critical,
            _ => Region::Exit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MemError {
    #[error("process {process} writes register {register} without being a writer")]
    WriterViolation { process: usize, register: String },
    #[error("process {process} uses {op} on register {register} with the wrong access kind")]
    AccessKind {
        process: usize,
        register: String,
        op: &'static str,
    },
    #[error("process {process}: instruction {pc} refers to missing target {target}")]
    BadTarget { process: usize, pc: usize, target: usize },
    #[error("process {0}: program must start with Try")]
    NoTry(usize),
    #[error("need at least one process")]
    NoProcesses,
}

/// Processes running finite control programs over shared registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedMemSystem {
    pub name: String,
    pub registers: Vec<Register>,
    pub programs: Vec<Vec<Instr>>,
}

/// Decoded global state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemState {
    pub regs: Vec<i64>,
    pub pcs: Vec<usize>,
    pub regions: Vec<Region>,
}

impl MemState {
    pub fn encode(&self) -> Value {
        Value::record([
            ("regs", Value::list(self.regs.iter().map(|r| Value::Int(*r)))),
            ("pc", Value::list(self.pcs.iter().map(|p| Value::Int(*p as i64)))),
            ("region", Value::list(self.regions.iter().map(|r| Value::Int(r.code())))),
        ])
    }

    pub fn decode(v: &Value) -> Option<MemState> {
        let ints = |field: &str| -> Option<Vec<i64>> {
            v.get(field)?.as_list()?.iter().map(Value::as_int).collect()
        };
        Some(MemState {
            regs: ints("regs")?,
            pcs: ints("pc")?.into_iter().map(|p| p as usize).collect(),
            regions: ints("region")?.into_iter().map(Region::from_code).collect(),
        })
    }
}

/// Region of process `p` in an encoded state.
pub fn region_of(state: &Value, p: usize) -> Option<Region> {
    state
        .get("region")?
        .at(p)?
        .as_int()
        .map(Region::from_code)
}

pub fn critical_count(state: &Value) -> usize {
    state
        .get("region")
        .and_then(Value::as_list)
        .map_or(0, |rs| rs.iter().filter(|r| r.as_int() == Some(Region::Critical.code())).count())
}

impl SharedMemSystem {
    pub fn new(
        name: impl Into<String>,
        registers: Vec<Register>,
        programs: Vec<Vec<Instr>>,
    ) -> Result<Self, MemError> {
        if programs.is_empty() {
            return Err(MemError::NoProcesses);
        }
        for (p, prog) in programs.iter().enumerate() {
            if prog.first() != Some(&Instr::Try) {
                return Err(MemError::NoTry(p));
            }
            for (pc, instr) in prog.iter().enumerate() {
                let check_reg = |reg: usize| {
                    registers.get(reg).ok_or(MemError::BadTarget { process: p, pc, target: reg })
                };
                let check_pc = |target: usize| {
                    if target < prog.len() {
                        Ok(())
                    } else {
                        Err(MemError::BadTarget { process: p, pc, target })
                    }
                };
                match *instr {
                    Instr::Write { reg, .. } => match &check_reg(reg)?.access {
                        Access::ReadWrite { writers } if writers.contains(&p) => {}
                        Access::ReadWrite { .. } => {
                            return Err(MemError::WriterViolation {
                                process: p,
                                register: registers[reg].name.clone(),
                            })
                        }
                        Access::TestAndSet => {
                            return Err(MemError::AccessKind {
                                process: p,
                                register: registers[reg].name.clone(),
                                op: "write",
                            })
                        }
                    },
                    Instr::ReadBranch { reg, goto, .. } => {
                        if check_reg(reg)?.access == Access::TestAndSet {
                            return Err(MemError::AccessKind {
                                process: p,
                                register: registers[reg].name.clone(),
                                op: "read",
                            });
                        }
                        check_pc(goto)?;
                    }
                    Instr::TestAndSet { reg, fail_goto, .. } => {
                        if check_reg(reg)?.access != Access::TestAndSet {
                            return Err(MemError::AccessKind {
                                process: p,
                                register: registers[reg].name.clone(),
                                op: "test-and-set",
                            });
                        }
                        check_pc(fail_goto)?;
                    }
                    Instr::Goto(t) => check_pc(t)?,
                    Instr::Try | Instr::Crit | Instr::Exit | Instr::Rem => {}
                }
            }
        }
        Ok(SharedMemSystem {
            name: name.into(),
            registers,
            programs,
        })
    }

    pub fn n(&self) -> usize {
        self.programs.len()
    }

    pub fn uses_only_read_write(&self) -> bool {
        self.registers
            .iter()
            .all(|r| matches!(r.access, Access::ReadWrite { .. }))
    }

    pub fn initial_state(&self) -> MemState {
        MemState {
            regs: self.registers.iter().map(|r| r.initial).collect(),
            pcs: vec![0; self.n()],
            regions: vec![Region::Remainder; self.n()],
        }
    }

    pub fn current(&self, state: &MemState, p: usize) -> &Instr {
        &self.programs[p][state.pcs[p]]
    }

    /// The locally-controlled step of process `p`, if it has one.
    pub fn local_step(&self, state: &MemState, p: usize) -> Option<(Action, MemState)> {
        let mut next = state.clone();
        let pc = state.pcs[p];
        let named = |op: &str, payload: Value| Action::new(format!("{op}_{p}"), payload);
        let action = match *self.current(state, p) {
            Instr::Try => return None,
            Instr::Write { reg, value } => {
                next.regs[reg] = value;
                next.pcs[p] = pc + 1;
                named("write", reg_payload(reg, value))
            }
            Instr::ReadBranch { reg, equals, goto } => {
                let v = state.regs[reg];
                next.pcs[p] = if v == equals { goto } else { pc + 1 };
                named("read", reg_payload(reg, v))
            }
            Instr::TestAndSet { reg, expect, set, fail_goto } => {
                let old = state.regs[reg];
                if expect.is_none_or(|e| e == old) {
                    next.regs[reg] = set;
                    next.pcs[p] = pc + 1;
                } else {
                    next.pcs[p] = fail_goto;
                }
                named("tas", reg_payload(reg, old))
            }
            Instr::Crit => {
                if state.regions[p] != Region::Trying {
                    return None;
                }
                next.regions[p] = Region::Critical;
                next.pcs[p] = pc + 1;
                named("crit", Value::Unit)
            }
            Instr::Exit => {
                if state.regions[p] != Region::Critical {
                    return None;
                }
                next.regions[p] = Region::Exit;
                next.pcs[p] = pc + 1;
                named("exit", Value::Unit)
            }
            Instr::Rem => {
                if state.regions[p] != Region::Exit {
                    return None;
                }
                next.regions[p] = Region::Remainder;
                next.pcs[p] = 0;
                named("rem", Value::Unit)
            }
            Instr::Goto(t) => {
                next.pcs[p] = t;
                named("skip", Value::Unit)
            }
        };
        Some((action, next))
    }

    /// Applies input `try_p`. Outside the remainder region it is a no-op.
    pub fn try_input(&self, state: &MemState, p: usize) -> MemState {
        let mut next = state.clone();
        if state.regions[p] == Region::Remainder && state.pcs[p] == 0 {
            next.regions[p] = Region::Trying;
            next.pcs[p] = 1;
        }
        next
    }

    /// The I/O automaton of the whole system. Actions are named per process
    /// (`try_i`, `crit_i`, `exit_i`, `rem_i`, `read_i`, `write_i`, `tas_i`,
    /// `skip_i`); each process is one task `p{i}`. `try_i` is the only input.
    pub fn automaton(&self) -> Automaton {
        let mut signature = Signature::new();
        let mut tasks = BTreeMap::new();
        for p in 0..self.n() {
            signature = signature.input(format!("try_{p}"));
            let mut owned = BTreeSet::new();
            for op in ["crit", "exit", "rem"] {
                signature = signature.output(format!("{op}_{p}"));
                owned.insert(format!("{op}_{p}"));
            }
            for op in ["read", "write", "tas", "skip"] {
                signature = signature.internal(format!("{op}_{p}"));
                owned.insert(format!("{op}_{p}"));
            }
            tasks.insert(format!("p{p}"), owned);
        }
        Automaton::new(
            self.name.clone(),
            signature,
            vec![self.initial_state().encode()],
            tasks,
            MemBehavior(Arc::new(self.clone())),
        )
        .expect("shared-memory automaton is well formed")
    }
}

fn reg_payload(reg: usize, value: i64) -> Value {
    Value::record([("reg", Value::Int(reg as i64)), ("val", Value::Int(value))])
}

struct MemBehavior(Arc<SharedMemSystem>);

impl Behavior for MemBehavior {
    fn enabled(&self, state: &Value) -> Vec<(Action, Value)> {
        let Some(s) = MemState::decode(state) else {
            return Vec::new();
        };
        (0..self.0.n())
            .filter_map(|p| self.0.local_step(&s, p))
            .map(|(a, next)| (a, next.encode()))
            .collect()
    }

    fn on_input(&self, state: &Value, action: &Action) -> Option<Value> {
        let p: usize = action.name.strip_prefix("try_")?.parse().ok()?;
        if p >= self.0.n() {
            return None;
        }
        let s = MemState::decode(state)?;
        Some(self.0.try_input(&s, p).encode())
    }

    fn input_alphabet(&self) -> Vec<Action> {
        (0..self.0.n()).map(|p| Action::bare(format!("try_{p}"))).collect()
    }
}
