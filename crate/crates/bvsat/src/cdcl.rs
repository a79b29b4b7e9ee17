//! A conflict-driven clause-learning SAT solver: two watched literals,
//! first-UIP learning, VSIDS-style activities with phase saving, and Luby
//! restarts. Small and dependency-free; the bit-blaster feeds it.

use std::collections::BinaryHeap;

pub type Var = u32;

/// A literal packed as `var << 1 | negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(v: Var) -> Lit {
        Lit(v << 1)
    }

    pub fn neg(v: Var) -> Lit {
        Lit(v << 1 | 1)
    }

    pub fn with_sign(v: Var, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl std::fmt::Display for Lit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if !self.is_positive() {
            write!(f, "-")?;
        }
        write!(f, "{}", self.var() + 1)
    }
}

const NO_REASON: u32 = u32::MAX;

pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<u32>>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: BinaryHeap<(u64, Var)>,
    saved_phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    pub conflicts: u64,
    pub decisions: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: BinaryHeap::new(),
            saved_phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            conflicts: 0,
            decisions: 0,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.assign.len() as u32
    }

    pub fn new_var(&mut self) -> Var {
        let v = self.assign.len() as Var;
        self.assign.push(0);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.activity.push(0.0);
        self.saved_phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.push((0, v));
        v
    }

    pub fn value(&self, l: Lit) -> Option<bool> {
        match self.assign[l.var() as usize] {
            0 => None,
            s => Some((s > 0) == l.is_positive()),
        }
    }

    /// The polarity of a variable in the satisfying assignment. Only
    /// meaningful after `solve` returned true; unassigned vars read false.
    pub fn model(&self, v: Var) -> bool {
        self.assign[v as usize] > 0
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Add a clause. Returns false if the solver is already unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return false;
        }
        let mut c: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            match self.value(l) {
                Some(true) => return true,
                Some(false) => continue,
                None => {
                    if c.contains(&!l) {
                        return true;
                    }
                    if !c.contains(&l) {
                        c.push(l);
                    }
                }
            }
        }
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                self.ok = self.propagate().is_none();
                self.ok
            }
            _ => {
                self.attach(c);
                true
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[c[0].index()].push(idx);
        self.watches[c[1].index()].push(idx);
        self.clauses.push(c);
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        debug_assert_eq!(self.value(l), None);
        let v = l.var() as usize;
        self.assign[v] = if l.is_positive() { 1 } else { -1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.index()]);
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                let c = ci as usize;
                if self.clauses[c][0] == false_lit {
                    self.clauses[c].swap(0, 1);
                }
                debug_assert_eq!(self.clauses[c][1], false_lit);
                let first = self.clauses[c][0];
                if self.value(first) == Some(true) {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..self.clauses[c].len() {
                    let lk = self.clauses[c][k];
                    if self.value(lk) != Some(false) {
                        self.clauses[c].swap(1, k);
                        self.watches[lk.index()].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                match self.value(first) {
                    None => {
                        self.enqueue(first, ci);
                        i += 1;
                    }
                    Some(false) => {
                        // Conflict: restore the remaining watches first.
                        self.watches[false_lit.index()].append(&mut ws);
                        self.qhead = self.trail.len();
                        return Some(ci);
                    }
                    Some(true) => unreachable!(),
                }
            }
            self.watches[false_lit.index()] = ws;
        }
        None
    }

    fn bump(&mut self, v: Var) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for act in &mut self.activity {
                *act *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.push((self.activity[v as usize].to_bits(), v));
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut counter = 0u32;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl as usize].len() {
                let q = self.clauses[confl as usize][k];
                let v = q.var() as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(q.var());
                    if self.level[v] >= self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var() as usize] {
                    break;
                }
            }
            let pl = self.trail[idx];
            self.seen[pl.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = !pl;
                break;
            }
            confl = self.reason[pl.var() as usize];
            debug_assert_ne!(confl, NO_REASON);
            p = Some(pl);
        }
        for l in &learnt[1..] {
            self.seen[l.var() as usize] = false;
        }
        let back_level = if learnt.len() == 1 {
            0
        } else {
            let (k, _) = learnt[1..]
                .iter()
                .enumerate()
                .max_by_key(|(_, l)| self.level[l.var() as usize])
                .map(|(k, l)| (k + 1, l))
                .unwrap();
            learnt.swap(1, k);
            self.level[learnt[1].var() as usize]
        };
        (learnt, back_level)
    }

    fn backtrack(&mut self, to_level: u32) {
        if self.decision_level() <= to_level {
            return;
        }
        let keep = self.trail_lim[to_level as usize];
        for k in (keep..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var() as usize;
            self.saved_phase[v] = l.is_positive();
            self.assign[v] = 0;
            self.reason[v] = NO_REASON;
            self.heap.push((self.activity[v].to_bits(), l.var()));
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(to_level as usize);
        self.qhead = self.trail.len();
    }

    fn pick_decision(&mut self) -> Option<Var> {
        while let Some((_, v)) = self.heap.pop() {
            if self.assign[v as usize] == 0 {
                return Some(v);
            }
        }
        None
    }

    pub fn solve(&mut self) -> bool {
        if !self.ok {
            return false;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return false;
        }
        let mut restart_round = 0u64;
        let mut budget = 64 * luby(restart_round);
        let mut since_restart = 0u64;
        loop {
            match self.propagate() {
                Some(confl) => {
                    self.conflicts += 1;
                    since_restart += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return false;
                    }
                    let (learnt, back) = self.analyze(confl);
                    self.backtrack(back);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], NO_REASON);
                    } else {
                        let asserting = learnt[0];
                        let idx = self.attach(learnt);
                        self.enqueue(asserting, idx);
                    }
                    self.var_inc /= 0.95;
                    if since_restart >= budget {
                        since_restart = 0;
                        restart_round += 1;
                        budget = 64 * luby(restart_round);
                        self.backtrack(0);
                    }
                }
                None => {
                    let Some(v) = self.pick_decision() else {
                        return true;
                    };
                    self.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(Lit::with_sign(v, self.saved_phase[v as usize]), NO_REASON);
                }
            }
        }
    }
}

/// The Luby restart sequence 1 1 2 1 1 2 4 ... (zero-indexed).
fn luby(x: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = x;
    let mut size = size;
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    1 << seq
}
