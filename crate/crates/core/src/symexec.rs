//! Path-sensitive symbolic execution over the lowered CFGs.
//!
//! Exploration is a depth-first walk that never merges states: each node in
//! the exploded graph is one program state on one path, linked to the state
//! it came from. Branches fork the walk (true edge first), calls to defined
//! functions are inlined up to a depth budget, and loops unroll up to a
//! visit budget. When a checker finds a definite violation the walk records
//! a terminal epsilon node carrying the bug hypothesis; refutation later
//! replays the constraints along the epsilon's path.

use std::collections::HashMap;

use crate::checkers::{self, BugHypothesis, CheckOutcome};
use crate::frontend::ast::{AstBinOp, AstUnOp, DeclId, Expr, ExprKind, Type};
use crate::frontend::cfg::{BlockId, CfgSet, CfgStmt, Terminator};
use crate::frontend::pretty::print_expr;
use crate::intervals::assume;
use crate::ir::{
    BinOpKind, BitVecValue, Interval, ProgramState, Signedness, SymExpr, SymbolGen,
    UnOpKind, VarSlot, Width,
};
use crate::loc::SourceLoc;

/// Exploration budgets. The defaults match the analyzer's documented
/// behavior; the CLI exposes them as flags.
#[derive(Clone, Copy, Debug)]
pub struct ExecConfig {
    /// Maximum times one basic block may run within a single frame, which
    /// bounds loop unrolling.
    pub max_loop_unrollings: u32,
    /// Maximum depth of inlined calls; deeper calls are treated as opaque.
    pub max_call_depth: u32,
    /// Hard cap on exploded-graph nodes across the whole translation unit.
    pub max_nodes: usize,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            max_loop_unrollings: 4,
            max_call_depth: 5,
            max_nodes: 100_000,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// The operation that produced a node from its parent.
#[derive(Clone, Debug)]
pub enum EdgeOp {
    Entry { func: String },
    Stmt { desc: String, loc: SourceLoc },
    Assume { cond: SymExpr, truth: bool },
    Call { callee: String, external: bool, loc: SourceLoc },
    Ret { func: String },
    Epsilon(BugHypothesis),
}

#[derive(Clone, Debug)]
pub struct ExplodedNode {
    pub parent: Option<NodeId>,
    pub op: EdgeOp,
    pub state: ProgramState,
}

impl ExplodedNode {
    pub fn is_epsilon(&self) -> bool {
        matches!(self.op, EdgeOp::Epsilon(_))
    }

    pub fn hypothesis(&self) -> Option<&BugHypothesis> {
        match &self.op {
            EdgeOp::Epsilon(h) => Some(h),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct ExecStats {
    pub nodes: usize,
    pub paths_completed: u64,
    pub paths_abandoned_loop: u64,
    pub calls_inlined: u64,
    pub calls_external: u64,
    pub out_of_nodes: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ExplodedGraph {
    pub nodes: Vec<ExplodedNode>,
    pub epsilons: Vec<NodeId>,
    pub stats: ExecStats,
}

impl ExplodedGraph {
    pub fn node(&self, id: NodeId) -> &ExplodedNode {
        &self.nodes[id.index()]
    }

    /// Node ids from the path root down to `id`, inclusive.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur.index()].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Stable text rendering of one root-to-node path.
    pub fn dump_path(&self, id: NodeId) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for nid in self.path_to(id) {
            let node = self.node(nid);
            let _ = match &node.op {
                EdgeOp::Entry { func } => writeln!(out, "{nid}: entry {func}"),
                EdgeOp::Stmt { desc, loc } => writeln!(out, "{nid}: [{loc}] {desc}"),
                EdgeOp::Assume { cond, truth } => {
                    writeln!(out, "{nid}: assume {cond} is {truth}")
                }
                EdgeOp::Call { callee, external, .. } => {
                    let kind = if *external { "external call" } else { "call" };
                    writeln!(out, "{nid}: {kind} {callee}")
                }
                EdgeOp::Ret { func } => writeln!(out, "{nid}: ret {func}"),
                EdgeOp::Epsilon(h) => {
                    writeln!(out, "{nid}: epsilon {} [{}] {}", h.checker, h.loc, h.message)
                }
            };
        }
        out
    }
}

pub fn execute(cfgs: &CfgSet, config: &ExecConfig) -> ExplodedGraph {
    let mut ex = Executor {
        cfgs,
        config: *config,
        nodes: Vec::new(),
        epsilons: Vec::new(),
        stats: ExecStats::default(),
        symgen: SymbolGen::new(),
        next_slot: 0,
        slot_types: Vec::new(),
    };
    for func in 0..cfgs.functions.len() {
        ex.run_entry(func);
    }
    ex.stats.nodes = ex.nodes.len();
    ExplodedGraph {
        nodes: ex.nodes,
        epsilons: ex.epsilons,
        stats: ex.stats,
    }
}

/// One inlined activation: which function, how deep, per-block visit
/// counts, and the declaration-to-slot map for this activation.
#[derive(Clone)]
struct Frame {
    func: usize,
    depth: u32,
    visits: HashMap<u32, u32>,
    slots: HashMap<u32, VarSlot>,
}

type RetCont = (NodeId, ProgramState, Option<SymExpr>);
type ValCont = (NodeId, ProgramState, SymExpr);

struct Executor<'a> {
    cfgs: &'a CfgSet,
    config: ExecConfig,
    nodes: Vec<ExplodedNode>,
    epsilons: Vec<NodeId>,
    stats: ExecStats,
    symgen: SymbolGen,
    next_slot: u32,
    slot_types: Vec<Type>,
}

impl<'a> Executor<'a> {
    fn add_node(
        &mut self,
        parent: Option<NodeId>,
        op: EdgeOp,
        state: ProgramState,
    ) -> Option<NodeId> {
        if self.nodes.len() >= self.config.max_nodes {
            self.stats.out_of_nodes = true;
            return None;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(ExplodedNode { parent, op, state });
        Some(id)
    }

    fn alloc_slot(&mut self, ty: Type) -> VarSlot {
        let slot = VarSlot(self.next_slot);
        self.next_slot += 1;
        self.slot_types.push(ty);
        slot
    }

    fn slot_type(&self, slot: VarSlot) -> Type {
        self.slot_types[slot.0 as usize]
    }

    fn decl_slot(&mut self, frame: &mut Frame, decl: DeclId) -> VarSlot {
        if let Some(&slot) = frame.slots.get(&decl.0) {
            return slot;
        }
        let ty = self.cfgs.decl(decl).ty;
        let slot = self.alloc_slot(ty);
        frame.slots.insert(decl.0, slot);
        slot
    }

    fn conjure(&mut self, ty: Type, name: &str, loc: SourceLoc) -> SymExpr {
        SymExpr::symbol(self.symgen.fresh(
            ty.value_width(),
            ty.value_signedness(),
            name,
            loc,
        ))
    }

    fn run_entry(&mut self, func: usize) {
        let cfgs = self.cfgs;
        let cfg = &cfgs.functions[func];
        let mut state = ProgramState::new();
        let mut frame = Frame {
            func,
            depth: 1,
            visits: HashMap::new(),
            slots: HashMap::new(),
        };
        for &(decl, ty) in &cfg.params {
            let slot = self.decl_slot(&mut frame, decl);
            let info = cfgs.decl(decl);
            let sym = self.conjure(ty, &info.name, info.span.start);
            state.bind(slot, sym);
        }
        state.point.func = func as u32;
        let Some(root) = self.add_node(None, EdgeOp::Entry { func: cfg.name.clone() }, state.clone())
        else {
            return;
        };
        let mut rets = Vec::new();
        self.enter_block(frame, cfg.entry, root, state, &mut rets);
        self.stats.paths_completed += rets.len() as u64;
    }

    fn enter_block(
        &mut self,
        mut frame: Frame,
        block: BlockId,
        node: NodeId,
        mut state: ProgramState,
        rets: &mut Vec<RetCont>,
    ) {
        let visits = frame.visits.entry(block.0).or_insert(0);
        *visits += 1;
        if *visits > self.config.max_loop_unrollings {
            self.stats.paths_abandoned_loop += 1;
            return;
        }
        state.point.block = block.0;
        self.exec_stmts(frame, block, 0, node, state, rets);
    }

    fn exec_stmts(
        &mut self,
        mut frame: Frame,
        block: BlockId,
        mut idx: usize,
        mut node: NodeId,
        mut state: ProgramState,
        rets: &mut Vec<RetCont>,
    ) {
        let cfgs = self.cfgs;
        loop {
            let bb = &cfgs.functions[frame.func].blocks[block.index()];
            if idx >= bb.stmts.len() {
                return self.exec_term(frame, block, node, state, rets);
            }
            state.point.stmt = idx as u32;
            let mut conts: Vec<(NodeId, ProgramState)> = Vec::new();
            match &bb.stmts[idx] {
                CfgStmt::Decl { decl, ty, init, span } => {
                    let info = cfgs.decl(*decl);
                    match init {
                        None => {
                            // Slot exists; the value stays unbound until
                            // first read, which conjures a fresh symbol.
                            self.decl_slot(&mut frame, *decl);
                            let desc = format!("decl {}", info.name);
                            if let Some(n) = self.add_node(
                                Some(node),
                                EdgeOp::Stmt { desc, loc: span.start },
                                state.clone(),
                            ) {
                                conts.push((n, state.clone()));
                            }
                        }
                        Some(init) => {
                            let desc = format!("decl {} = {}", info.name, print_expr(init));
                            for (n, mut s, v) in
                                self.eval(&mut frame, node, state.clone(), init)
                            {
                                let v = convert(v, init.type_of(), *ty);
                                let slot = self.decl_slot(&mut frame, *decl);
                                s.bind(slot, v);
                                if let Some(n2) = self.add_node(
                                    Some(n),
                                    EdgeOp::Stmt { desc: desc.clone(), loc: span.start },
                                    s.clone(),
                                ) {
                                    conts.push((n2, s));
                                }
                            }
                        }
                    }
                }
                CfgStmt::Assign { decl, value, span } => {
                    let info = cfgs.decl(*decl);
                    let desc = format!("{} = {}", info.name, print_expr(value));
                    let target_ty = info.ty;
                    for (n, mut s, v) in self.eval(&mut frame, node, state.clone(), value) {
                        let v = convert(v, value.type_of(), target_ty);
                        let slot = self.decl_slot(&mut frame, *decl);
                        s.bind(slot, v);
                        if let Some(n2) = self.add_node(
                            Some(n),
                            EdgeOp::Stmt { desc: desc.clone(), loc: span.start },
                            s.clone(),
                        ) {
                            conts.push((n2, s));
                        }
                    }
                }
                CfgStmt::Store { ptr, value, star_span } => {
                    let desc = format!("*({}) = {}", print_expr(ptr), print_expr(value));
                    let source_var = var_name(ptr);
                    let pointee_ty = ptr.type_of().pointee();
                    for (n, s, pv) in self.eval(&mut frame, node, state.clone(), ptr) {
                        let outcome = checkers::check_deref(
                            &s,
                            &pv,
                            star_span.start,
                            source_var.as_deref(),
                        );
                        let Some((n, s)) = self.apply_check(outcome, n, s) else {
                            continue;
                        };
                        for (n2, mut s2, v) in self.eval(&mut frame, n, s.clone(), value) {
                            let v = convert(v, value.type_of(), pointee_ty);
                            if let Some(slot) = pv
                                .as_symbol()
                                .and_then(|sym| s2.pointee_of(sym.id))
                            {
                                s2.bind(slot, v);
                            }
                            if let Some(n3) = self.add_node(
                                Some(n2),
                                EdgeOp::Stmt { desc: desc.clone(), loc: star_span.start },
                                s2.clone(),
                            ) {
                                conts.push((n3, s2));
                            }
                        }
                    }
                }
                CfgStmt::Eval { expr } => {
                    let desc = format!("eval {}", print_expr(expr));
                    let loc = expr.span.start;
                    let evaled: Vec<(NodeId, ProgramState)> =
                        if let ExprKind::Call { name, args } = &expr.kind {
                            self.eval_call(&mut frame, node, state.clone(), name, args, loc)
                                .into_iter()
                                .map(|(n, s, _)| (n, s))
                                .collect()
                        } else {
                            self.eval(&mut frame, node, state.clone(), expr)
                                .into_iter()
                                .map(|(n, s, _)| (n, s))
                                .collect()
                        };
                    for (n, s) in evaled {
                        if let Some(n2) = self.add_node(
                            Some(n),
                            EdgeOp::Stmt { desc: desc.clone(), loc },
                            s.clone(),
                        ) {
                            conts.push((n2, s));
                        }
                    }
                }
            }
            match conts.len() {
                0 => return,
                1 => {
                    let (n, s) = conts.pop().unwrap();
                    node = n;
                    state = s;
                    idx += 1;
                }
                _ => {
                    for (n, s) in conts {
                        self.exec_stmts(frame.clone(), block, idx + 1, n, s, rets);
                    }
                    return;
                }
            }
        }
    }

    fn exec_term(
        &mut self,
        mut frame: Frame,
        block: BlockId,
        node: NodeId,
        state: ProgramState,
        rets: &mut Vec<RetCont>,
    ) {
        let cfgs = self.cfgs;
        let cfg = &cfgs.functions[frame.func];
        match &cfg.blocks[block.index()].term {
            Terminator::Jump(b) => self.enter_block(frame, *b, node, state, rets),
            Terminator::Branch { cond, then_blk, else_blk } => {
                for (n, s, cv) in self.eval_cond(&mut frame, node, state, cond) {
                    let cond = as_condition(&cv);
                    for (truth, target) in [(true, *then_blk), (false, *else_blk)] {
                        let Some(s2) = assume(&s, &cond, truth) else { continue };
                        let Some(n2) = self.add_node(
                            Some(n),
                            EdgeOp::Assume { cond: cond.clone(), truth },
                            s2.clone(),
                        ) else {
                            continue;
                        };
                        self.enter_block(frame.clone(), target, n2, s2, rets);
                    }
                }
            }
            Terminator::Ret { value, .. } => {
                let func_name = cfg.name.clone();
                match value {
                    Some(e) => {
                        let ret_ty = cfg.ret.expect("typed return in void function");
                        for (n, s, v) in self.eval(&mut frame, node, state, e) {
                            let v = convert(v, e.type_of(), ret_ty);
                            if let Some(n2) = self.add_node(
                                Some(n),
                                EdgeOp::Ret { func: func_name.clone() },
                                s.clone(),
                            ) {
                                rets.push((n2, s, Some(v)));
                            }
                        }
                    }
                    None => {
                        if let Some(n2) = self.add_node(
                            Some(node),
                            EdgeOp::Ret { func: func_name },
                            state.clone(),
                        ) {
                            rets.push((n2, state, None));
                        }
                    }
                }
            }
        }
    }

    /// Apply a checker outcome: pass through, or emit an epsilon node and
    /// end the path.
    fn apply_check(
        &mut self,
        outcome: CheckOutcome,
        node: NodeId,
        state: ProgramState,
    ) -> Option<(NodeId, ProgramState)> {
        match outcome {
            CheckOutcome::Safe => Some((node, state)),
            CheckOutcome::Violation(hyp) => {
                self.emit_epsilon(node, &state, hyp);
                None
            }
        }
    }

    fn emit_epsilon(&mut self, parent: NodeId, state: &ProgramState, hyp: BugHypothesis) {
        let mut s = state.clone();
        // Pin the hypothesis into the constraint map so the encoder sees a
        // point interval for the violating expression, constants included.
        s.constraints.ensure_entry(hyp.expr.clone());
        let pinned = s
            .constraints
            .refine(hyp.expr.clone(), Interval::point(hyp.expr.width(), 0));
        debug_assert!(pinned, "epsilon emitted for a value that cannot be zero");
        if let Some(id) = self.add_node(Some(parent), EdgeOp::Epsilon(hyp), s) {
            self.epsilons.push(id);
        }
    }

    /// Evaluate an expression for its value. Every returned continuation is
    /// one path through any forks the evaluation caused (checker
    /// assumptions, inlined calls).
    fn eval(
        &mut self,
        frame: &mut Frame,
        node: NodeId,
        state: ProgramState,
        expr: &Expr,
    ) -> Vec<ValCont> {
        match &expr.kind {
            ExprKind::IntLit(v) => {
                let w = expr.type_of().value_width();
                vec![(node, state, SymExpr::constant(BitVecValue::new(w, *v)))]
            }
            ExprKind::Var { name, decl } => {
                let slot = self.decl_slot(frame, *decl);
                match state.lookup(slot).cloned() {
                    Some(v) => vec![(node, state, v)],
                    None => {
                        // First read of an uninitialized variable: bind a
                        // fresh symbol so later reads agree with this one.
                        let ty = self.slot_type(slot);
                        let v = self.conjure(ty, name, expr.span.start);
                        let mut s = state;
                        s.bind(slot, v.clone());
                        vec![(node, s, v)]
                    }
                }
            }
            ExprKind::Un { op, operand } => match op {
                AstUnOp::Deref => {
                    let source_var = var_name(operand);
                    let loaded_ty = expr.type_of();
                    let loc = expr.span.start;
                    let mut out = Vec::new();
                    for (n, s, pv) in self.eval(frame, node, state, operand) {
                        let outcome =
                            checkers::check_deref(&s, &pv, loc, source_var.as_deref());
                        let Some((n, mut s)) = self.apply_check(outcome, n, s) else {
                            continue;
                        };
                        let slot = pv.as_symbol().and_then(|sym| s.pointee_of(sym.id));
                        let v = match slot {
                            Some(slot) => match s.lookup(slot) {
                                Some(v) => v.clone(),
                                None => {
                                    let ty = self.slot_type(slot);
                                    let v = self.conjure(ty, "deref", loc);
                                    s.bind(slot, v.clone());
                                    v
                                }
                            },
                            // Unknown pointee: each load conjures fresh.
                            None => self.conjure(loaded_ty, "deref", loc),
                        };
                        out.push((n, s, v));
                    }
                    out
                }
                AstUnOp::AddrOf => {
                    let ExprKind::Var { name, decl } = &operand.kind else {
                        unreachable!("sema admits only &variable");
                    };
                    let slot = self.decl_slot(frame, *decl);
                    let mut s = state;
                    let sym = match s.addrs.get(&slot) {
                        Some(sym) => sym.clone(),
                        None => {
                            let sym = self.symgen.fresh(
                                Width::W64,
                                Signedness::Unsigned,
                                &format!("&{name}"),
                                expr.span.start,
                            );
                            s.addrs.insert(slot, sym.clone());
                            // Addresses of locals are never null.
                            s.constraints.refine(
                                SymExpr::symbol(sym.clone()),
                                Interval::new(Width::W64, 1, Width::W64.mask()).unwrap(),
                            );
                            sym
                        }
                    };
                    vec![(node, s, SymExpr::symbol(sym))]
                }
                AstUnOp::Neg | AstUnOp::BitNot => {
                    let kind = if *op == AstUnOp::Neg {
                        UnOpKind::Neg
                    } else {
                        UnOpKind::BitNot
                    };
                    self.eval(frame, node, state, operand)
                        .into_iter()
                        .map(|(n, s, v)| (n, s, SymExpr::unop(kind, v)))
                        .collect()
                }
                AstUnOp::LogNot => {
                    // `!e` is `(e == 0)` widened back to int.
                    self.eval(frame, node, state, operand)
                        .into_iter()
                        .map(|(n, s, v)| {
                            let cmp = SymExpr::binop(
                                BinOpKind::Eq,
                                v.clone(),
                                SymExpr::lit(v.width(), 0),
                            );
                            (n, s, SymExpr::cast(Width::W32, false, cmp))
                        })
                        .collect()
                }
            },
            ExprKind::Bin { op, .. } if op.is_comparison() => self
                .eval_cmp(frame, node, state, expr)
                .into_iter()
                .map(|(n, s, raw)| (n, s, SymExpr::cast(Width::W32, false, raw)))
                .collect(),
            ExprKind::Bin { op, op_span, lhs, rhs } => {
                debug_assert!(
                    !op.is_short_circuit(),
                    "short-circuit operators are lowered away"
                );
                let lt = lhs.type_of();
                let rt = rhs.type_of();
                let mut out = Vec::new();
                for (n, s, lv) in self.eval(frame, node, state, lhs) {
                    for (n, s, rv) in self.eval(frame, n, s, rhs) {
                        match op {
                            AstBinOp::Shl | AstBinOp::Shr => {
                                let kind = if *op == AstBinOp::Shl {
                                    BinOpKind::Shl
                                } else if lt.value_signedness() == Signedness::Signed {
                                    BinOpKind::AShr
                                } else {
                                    BinOpKind::LShr
                                };
                                let rv = convert(rv.clone(), rt, lt);
                                out.push((n, s, SymExpr::binop(kind, lv.clone(), rv)));
                            }
                            AstBinOp::Div | AstBinOp::Rem => {
                                let ct = crate::frontend::sema::usual_type(lt, rt);
                                let lv = convert(lv.clone(), lt, ct);
                                let rv = convert(rv.clone(), rt, ct);
                                let outcome =
                                    checkers::check_division(&s, &rv, op_span.start);
                                let Some((n, s)) = self.apply_check(outcome, n, s) else {
                                    continue;
                                };
                                let signed = ct.value_signedness() == Signedness::Signed;
                                let kind = match (op, signed) {
                                    (AstBinOp::Div, true) => BinOpKind::SDiv,
                                    (AstBinOp::Div, false) => BinOpKind::UDiv,
                                    (AstBinOp::Rem, true) => BinOpKind::SRem,
                                    (AstBinOp::Rem, false) => BinOpKind::URem,
                                    _ => unreachable!(),
                                };
                                out.push((n, s, SymExpr::binop(kind, lv, rv)));
                            }
                            _ => {
                                let ct = crate::frontend::sema::usual_type(lt, rt);
                                let lv = convert(lv.clone(), lt, ct);
                                let rv = convert(rv.clone(), rt, ct);
                                let kind = match op {
                                    AstBinOp::Add => BinOpKind::Add,
                                    AstBinOp::Sub => BinOpKind::Sub,
                                    AstBinOp::Mul => BinOpKind::Mul,
                                    AstBinOp::BitAnd => BinOpKind::And,
                                    AstBinOp::BitOr => BinOpKind::Or,
                                    AstBinOp::BitXor => BinOpKind::Xor,
                                    _ => unreachable!(),
                                };
                                out.push((n, s, SymExpr::binop(kind, lv, rv)));
                            }
                        }
                    }
                }
                out
            }
            ExprKind::Cast { ty, operand } => {
                let from = operand.type_of();
                self.eval(frame, node, state, operand)
                    .into_iter()
                    .map(|(n, s, v)| (n, s, convert(v, from, *ty)))
                    .collect()
            }
            ExprKind::Call { name, args } => self
                .eval_call(frame, node, state, name, args, expr.span.start)
                .into_iter()
                .map(|(n, s, v)| {
                    let v = v.expect("void call used as a value");
                    (n, s, v)
                })
                .collect(),
        }
    }

    /// Evaluate a comparison to its raw width-1 value.
    fn eval_cmp(
        &mut self,
        frame: &mut Frame,
        node: NodeId,
        state: ProgramState,
        expr: &Expr,
    ) -> Vec<ValCont> {
        let ExprKind::Bin { op, lhs, rhs, .. } = &expr.kind else {
            unreachable!("eval_cmp on non-comparison");
        };
        let lt = lhs.type_of();
        let rt = rhs.type_of();
        let ct = if lt.is_pointer() || rt.is_pointer() {
            Type::scalar(Width::W64, Signedness::Unsigned)
        } else {
            crate::frontend::sema::usual_type(lt, rt)
        };
        let kind = cmp_kind(*op, ct.value_signedness());
        let mut out = Vec::new();
        for (n, s, lv) in self.eval(frame, node, state, lhs) {
            for (n, s, rv) in self.eval(frame, n, s, rhs) {
                let lv = convert(lv.clone(), lt, ct);
                let rv = convert(rv.clone(), rt, ct);
                out.push((n, s, SymExpr::binop(kind, lv, rv)));
            }
        }
        out
    }

    /// Evaluate a branch condition, preserving a root comparison in its
    /// width-1 form so `assume` can interpret it directly.
    fn eval_cond(
        &mut self,
        frame: &mut Frame,
        node: NodeId,
        state: ProgramState,
        cond: &Expr,
    ) -> Vec<ValCont> {
        match &cond.kind {
            ExprKind::Bin { op, .. } if op.is_comparison() => {
                self.eval_cmp(frame, node, state, cond)
            }
            _ => self.eval(frame, node, state, cond),
        }
    }

    fn eval_call(
        &mut self,
        frame: &mut Frame,
        node: NodeId,
        state: ProgramState,
        name: &str,
        args: &[Expr],
        loc: SourceLoc,
    ) -> Vec<RetCont> {
        let cfgs = self.cfgs;
        // Evaluate arguments left to right, threading forks.
        let mut conts: Vec<(NodeId, ProgramState, Vec<SymExpr>)> =
            vec![(node, state, Vec::new())];
        for arg in args {
            let mut next = Vec::new();
            for (n, s, vals) in conts {
                for (n2, s2, v) in self.eval(frame, n, s, arg) {
                    let mut vals = vals.clone();
                    vals.push(v);
                    next.push((n2, s2, vals));
                }
            }
            conts = next;
        }

        let callee = cfgs.by_name.get(name).copied();
        let inline = callee.is_some() && frame.depth < self.config.max_call_depth;
        let mut out = Vec::new();
        for (n, s, vals) in conts {
            if inline {
                let func = callee.unwrap();
                out.extend(self.inline_call(func, n, s, &vals, args, loc));
            } else {
                out.extend(self.opaque_call(name, n, s, &vals, args, loc));
            }
        }
        out
    }

    fn inline_call(
        &mut self,
        func: usize,
        node: NodeId,
        state: ProgramState,
        vals: &[SymExpr],
        args: &[Expr],
        loc: SourceLoc,
    ) -> Vec<RetCont> {
        let cfgs = self.cfgs;
        let cfg = &cfgs.functions[func];
        self.stats.calls_inlined += 1;
        let mut callee_frame = Frame {
            func,
            depth: 0, // fixed below; depth is relative to the caller
            visits: HashMap::new(),
            slots: HashMap::new(),
        };
        let mut s = state;
        for ((&(decl, pty), v), arg) in cfg.params.iter().zip(vals).zip(args) {
            let slot = self.decl_slot(&mut callee_frame, decl);
            let v = convert(v.clone(), arg.type_of(), pty);
            s.bind(slot, v);
        }
        let Some(n) = self.add_node(
            Some(node),
            EdgeOp::Call { callee: cfg.name.clone(), external: false, loc },
            s.clone(),
        ) else {
            return Vec::new();
        };
        // The caller's frame depth is implicit in the recursion; compute the
        // callee depth from the node chain instead of threading it through
        // state: parent frames each contributed one Call edge.
        callee_frame.depth = self.call_depth_at(n);
        let saved_point = s.point;
        s.point = crate::ir::ProgramPoint { func: func as u32, block: 0, stmt: 0 };
        let mut callee_rets = Vec::new();
        self.enter_block(callee_frame, cfg.entry, n, s, &mut callee_rets);
        let mut out = Vec::new();
        for (rn, mut rs, rv) in callee_rets {
            rs.point = saved_point;
            let value = match (cfg.ret, rv) {
                (Some(_), Some(v)) => Some(v),
                (Some(t), None) => {
                    // Fell off the end of a non-void callee.
                    Some(self.conjure(t, &format!("{}()", cfg.name), loc))
                }
                (None, _) => None,
            };
            out.push((rn, rs, value));
        }
        out
    }

    fn call_depth_at(&self, mut node: NodeId) -> u32 {
        let mut depth = 1u32;
        loop {
            match &self.nodes[node.index()].op {
                EdgeOp::Call { external: false, .. } => depth += 1,
                EdgeOp::Ret { .. } => depth = depth.saturating_sub(1),
                EdgeOp::Entry { .. } => return depth,
                _ => {}
            }
            match self.nodes[node.index()].parent {
                Some(p) => node = p,
                None => return depth,
            }
        }
    }

    /// A call that is not inlined: external, undefined, or too deep. The
    /// result is a fresh symbol and anything reachable through pointer
    /// arguments is invalidated.
    fn opaque_call(
        &mut self,
        name: &str,
        node: NodeId,
        state: ProgramState,
        vals: &[SymExpr],
        args: &[Expr],
        loc: SourceLoc,
    ) -> Vec<RetCont> {
        self.stats.calls_external += 1;
        let mut s = state;
        for (v, arg) in vals.iter().zip(args) {
            if !arg.type_of().is_pointer() {
                continue;
            }
            let mut syms = Vec::new();
            v.collect_symbols(&mut syms);
            for sym in syms {
                if let Some(slot) = s.pointee_of(sym.id) {
                    let ty = self.slot_type(slot);
                    let fresh = self.conjure(ty, &format!("after {name}"), loc);
                    s.bind(slot, fresh);
                }
            }
        }
        let ret_ty = match self.cfgs.by_name.get(name) {
            Some(&i) => self.cfgs.functions[i].ret,
            None => self.cfgs.externals.get(name).and_then(|sig| sig.ret),
        };
        let value = ret_ty.map(|t| self.conjure(t, &format!("{name}()"), loc));
        match self.add_node(
            Some(node),
            EdgeOp::Call { callee: name.to_string(), external: true, loc },
            s.clone(),
        ) {
            Some(n) => vec![(n, s, value)],
            None => Vec::new(),
        }
    }
}

fn var_name(e: &Expr) -> Option<String> {
    match &e.kind {
        ExprKind::Var { name, .. } => Some(name.clone()),
        _ => None,
    }
}

/// Convert a symbolic value between MiniC types. Conversions to `_Bool`
/// compare against zero; everything else is a bit-level resize driven by
/// the source signedness.
pub fn convert(v: SymExpr, from: Type, to: Type) -> SymExpr {
    let fw = from.value_width();
    let tw = to.value_width();
    if tw == Width::W1 && !to.is_pointer() && fw != Width::W1 {
        return SymExpr::binop(BinOpKind::Ne, v.clone(), SymExpr::lit(fw, 0));
    }
    if fw == tw {
        return v;
    }
    let sign_extend =
        fw.bits() < tw.bits() && from.value_signedness() == Signedness::Signed;
    SymExpr::cast(tw, sign_extend, v)
}

/// A branch condition in the width-1 form `assume` expects.
fn as_condition(cv: &SymExpr) -> SymExpr {
    if cv.width() == Width::W1 {
        cv.clone()
    } else {
        SymExpr::binop(BinOpKind::Ne, cv.clone(), SymExpr::lit(cv.width(), 0))
    }
}

fn cmp_kind(op: AstBinOp, sign: Signedness) -> BinOpKind {
    use AstBinOp::*;
    let signed = sign == Signedness::Signed;
    match op {
        Eq => BinOpKind::Eq,
        Ne => BinOpKind::Ne,
        Lt if signed => BinOpKind::Slt,
        Lt => BinOpKind::Ult,
        Le if signed => BinOpKind::Sle,
        Le => BinOpKind::Ule,
        Gt if signed => BinOpKind::Sgt,
        Gt => BinOpKind::Ugt,
        Ge if signed => BinOpKind::Sge,
        Ge => BinOpKind::Uge,
        _ => unreachable!("not a comparison"),
    }
}
