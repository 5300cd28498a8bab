use std::collections::BTreeSet;

use super::system::{Access, Instr, Register, SharedMemSystem};

/// One-bit-per-process algorithm on `n` single-writer binary registers.
///
/// Process `i` clears its flag, backs off while any lower-indexed flag is
/// set, raises its flag, re-checks the lower flags (restarting on conflict),
/// then waits for every higher-indexed flag to be clear before entering.
/// Guarantees mutual exclusion and deadlock-freedom, not fairness.
pub fn burns_lynch(n: usize) -> SharedMemSystem {
    assert!(n >= 2, "burns_lynch needs n >= 2");
    let registers = (0..n)
        .map(|i| Register {
            name: format!("flag{i}"),
            access: Access::ReadWrite {
                writers: BTreeSet::from([i]),
            },
            initial: 0,
        })
        .collect();
    let programs = (0..n).map(|i| burns_program(i, n)).collect();
    SharedMemSystem::new(format!("burns-lynch-{n}"), registers, programs)
        .expect("burns-lynch programs are valid")
}

fn burns_program(i: usize, n: usize) -> Vec<Instr> {
    const RESTART: usize = 1;
    let mut prog = vec![Instr::Try, Instr::Write { reg: i, value: 0 }];
    for j in 0..i {
        prog.push(Instr::ReadBranch { reg: j, equals: 1, goto: RESTART });
    }
    prog.push(Instr::Write { reg: i, value: 1 });
    for j in 0..i {
        prog.push(Instr::ReadBranch { reg: j, equals: 1, goto: RESTART });
    }
    let wait = prog.len();
    for j in i + 1..n {
        prog.push(Instr::ReadBranch { reg: j, equals: 1, goto: wait });
    }
    prog.extend([
        Instr::Crit,
        Instr::Exit,
        Instr::Write { reg: i, value: 0 },
        Instr::Rem,
    ]);
    prog
}

/// A single two-valued test-and-set register used as a semaphore.
pub fn semaphore(n: usize) -> SharedMemSystem {
    assert!(n >= 1, "semaphore needs n >= 1");
    let registers = vec![Register {
        name: "lock".into(),
        access: Access::TestAndSet,
        initial: 0,
    }];
    let program = vec![
        Instr::Try,
        Instr::TestAndSet { reg: 0, expect: Some(0), set: 1, fail_goto: 1 },
        Instr::Crit,
        Instr::Exit,
        Instr::TestAndSet { reg: 0, expect: None, set: 0, fail_goto: 4 },
        Instr::Rem,
    ];
    SharedMemSystem::new(format!("semaphore-{n}"), registers, vec![program; n])
        .expect("semaphore program is valid")
}

/// Deliberately broken: one multi-writer read/write register, read then
/// write with no handshake. Two processes can both see 0 and both enter.
pub fn one_register(n: usize) -> SharedMemSystem {
    assert!(n >= 1);
    let registers = vec![Register {
        name: "x".into(),
        access: Access::ReadWrite {
            writers: (0..n).collect(),
        },
        initial: 0,
    }];
    let program = vec![
        Instr::Try,
        Instr::ReadBranch { reg: 0, equals: 1, goto: 1 },
        Instr::Write { reg: 0, value: 1 },
        Instr::Crit,
        Instr::Exit,
        Instr::Write { reg: 0, value: 0 },
        Instr::Rem,
    ];
    SharedMemSystem::new(format!("one-register-{n}"), registers, vec![program; n])
        .expect("one-register program is valid")
}
