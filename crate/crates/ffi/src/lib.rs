//! C bindings for the nanolog engine.
//!
//! Programs and proofs are opaque handles created and destroyed through this
//! API. Every fallible function returns an [`NlStatus`]; on failure a
//! description is available from [`nl_last_error`] on the same thread.
//! Strings returned through `out` parameters are owned by the caller and must
//! be released with [`nl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use nanolog::api::{ProofView, QueryResponse};
use nanolog::{
    parse_program, parse_query, parse_rule, parse_term, solve, Program, ProofError, ProofState, SolveOptions, Strategy,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidOption = 4,
    UnificationFailed = 5,
    NodeNotOpen = 6,
    BadPath = 7,
    EmptyHistory = 8,
    InvalidVariable = 9,
    BudgetExhausted = 10,
    BadIndex = 11,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStrategy {
    Dfs = 0,
    Bfs = 1,
    Iddfs = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NlSolveOptions {
    /// One of the `NlStrategy` values.
    pub strategy: u32,
    pub max_depth: u32,
    pub max_solutions: u32,
    pub step_budget: u64,
    /// Wall-clock limit in milliseconds; 0 for none.
    pub time_limit_ms: u64,
}

/// A parsed program.
pub struct NlProgram {
    program: Program,
}

/// An interactive proof.
pub struct NlProof {
    state: ProofState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: NlStatus, msg: impl Into<String>) -> NlStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into `NlStatus::Panic`.
fn guard(f: impl FnOnce() -> NlStatus) -> NlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(NlStatus::Panic, "internal error"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, NlStatus> {
    if p.is_null() {
        return Err(fail(NlStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NlStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn give_string(s: String, out: *mut *mut c_char) -> NlStatus {
    if out.is_null() {
        return fail(NlStatus::NullPointer, "null out pointer");
    }
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            NlStatus::Ok
        }
        Err(_) => fail(NlStatus::Panic, "output contains a NUL byte"),
    }
}

fn proof_status(e: &ProofError) -> NlStatus {
    match e {
        ProofError::BadPath(_) => NlStatus::BadPath,
        ProofError::NodeNotOpen => NlStatus::NodeNotOpen,
        ProofError::UnificationFailed => NlStatus::UnificationFailed,
        ProofError::EmptyHistory => NlStatus::EmptyHistory,
        ProofError::InvalidVariable(_) => NlStatus::InvalidVariable,
        ProofError::Cyclic(_) => NlStatus::BudgetExhausted,
        ProofError::ReplayMismatch { .. } => NlStatus::Panic,
    }
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn nl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn nl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn nl_solve_options_default() -> NlSolveOptions {
    let d = SolveOptions::default();
    NlSolveOptions {
        strategy: NlStrategy::Dfs as u32,
        max_depth: d.max_depth as u32,
        max_solutions: d.max_solutions as u32,
        step_budget: d.step_budget as u64,
        time_limit_ms: 0,
    }
}

/// Parses a whole program.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_program_parse(src: *const c_char, out: *mut *mut NlProgram) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return fail(NlStatus::NullPointer, "null out pointer");
        }
        let src = match text(src) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_program(src) {
            Ok(program) => {
                *out = Box::into_raw(Box::new(NlProgram { program }));
                NlStatus::Ok
            }
            Err(e) => fail(NlStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `p` must come from [`nl_program_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nl_program_free(p: *mut NlProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of rules, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live program handle.
#[no_mangle]
pub unsafe extern "C" fn nl_program_len(p: *const NlProgram) -> usize {
    p.as_ref().map_or(0, |p| p.program.len())
}

/// Parses one rule and appends it.
///
/// # Safety
/// `p` must be a live program handle and `rule` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nl_program_add_rule(p: *mut NlProgram, rule: *const c_char) -> NlStatus {
    guard(|| {
        let Some(p) = p.as_mut() else {
            return fail(NlStatus::NullPointer, "null program");
        };
        let src = match text(rule) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_rule(src) {
            Ok(r) => {
                p.program.push(r);
                NlStatus::Ok
            }
            Err(e) => fail(NlStatus::ParseError, e.to_string()),
        }
    })
}

/// Canonical listing of the program, one rule per line.
///
/// # Safety
/// `p` must be a live program handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_program_to_string(p: *const NlProgram, out: *mut *mut c_char) -> NlStatus {
    guard(|| match p.as_ref() {
        Some(p) => give_string(p.program.to_string(), out),
        None => fail(NlStatus::NullPointer, "null program"),
    })
}

/// Runs `query` and writes the JSON query response (the same document the
/// HTTP service returns) to `out`. `opts` may be null for the defaults.
///
/// # Safety
/// `p` must be a live program handle, `query` a NUL-terminated string,
/// `opts` null or valid, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_solve_json(
    p: *const NlProgram,
    query: *const c_char,
    opts: *const NlSolveOptions,
    out: *mut *mut c_char,
) -> NlStatus {
    guard(|| {
        let Some(p) = p.as_ref() else {
            return fail(NlStatus::NullPointer, "null program");
        };
        let src = match text(query) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let raw = opts.as_ref().copied().unwrap_or_default();
        let strategy = match raw.strategy {
            0 => Strategy::Dfs,
            1 => Strategy::Bfs,
            2 => Strategy::Iddfs,
            other => return fail(NlStatus::InvalidOption, format!("unknown strategy {other}")),
        };
        let options = SolveOptions {
            strategy,
            max_depth: raw.max_depth as usize,
            max_solutions: raw.max_solutions as usize,
            step_budget: raw.step_budget as usize,
            time_limit: (raw.time_limit_ms > 0).then(|| Duration::from_millis(raw.time_limit_ms)),
            ..SolveOptions::default()
        };
        let goals = match parse_query(src) {
            Ok(g) => g,
            Err(e) => return fail(NlStatus::ParseError, e.to_string()),
        };
        match solve(&p.program, &goals, options) {
            Ok(outcome) => give_string(QueryResponse::from(&outcome).to_json(), out),
            Err(e) => fail(NlStatus::InvalidOption, e.to_string()),
        }
    })
}

/// Starts a proof of `goal`.
///
/// # Safety
/// `goal` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_proof_new(goal: *const c_char, out: *mut *mut NlProof) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return fail(NlStatus::NullPointer, "null out pointer");
        }
        let src = match text(goal) {
            Ok(s) => s.trim_end(),
            Err(s) => return s,
        };
        match parse_term(src.strip_suffix('.').unwrap_or(src)) {
            Ok(goal) => {
                *out = Box::into_raw(Box::new(NlProof {
                    state: ProofState::new(goal),
                }));
                NlStatus::Ok
            }
            Err(e) => fail(NlStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `proof` must come from [`nl_proof_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nl_proof_free(proof: *mut NlProof) {
    if !proof.is_null() {
        drop(Box::from_raw(proof));
    }
}

/// Applies rule `rule_index` of `program` to the node reached by following
/// `path` (child indices from the root). `path` may be null when
/// `path_len` is 0.
///
/// # Safety
/// `proof` and `program` must be live handles and `path` must point to
/// `path_len` readable elements.
#[no_mangle]
pub unsafe extern "C" fn nl_proof_apply(
    proof: *mut NlProof,
    path: *const usize,
    path_len: usize,
    program: *const NlProgram,
    rule_index: usize,
) -> NlStatus {
    guard(|| {
        let (Some(proof), Some(program)) = (proof.as_mut(), program.as_ref()) else {
            return fail(NlStatus::NullPointer, "null handle");
        };
        let path: &[usize] = match (path.is_null(), path_len) {
            (_, 0) => &[],
            (true, _) => return fail(NlStatus::NullPointer, "null path"),
            (false, n) => std::slice::from_raw_parts(path, n),
        };
        let Some(rule) = program.program.rules().get(rule_index) else {
            let len = program.program.len();
            return fail(
                NlStatus::BadIndex,
                format!("rule index {rule_index} out of range ({len} rules)"),
            );
        };
        match proof.state.apply_rule(path, rule) {
            Ok(()) => NlStatus::Ok,
            Err(e) => fail(proof_status(&e), e.to_string()),
        }
    })
}

/// Binds variable `var` to the term `term` across the whole proof.
///
/// # Safety
/// `proof` must be a live handle; `var` and `term` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn nl_proof_substitute(proof: *mut NlProof, var: *const c_char, term: *const c_char) -> NlStatus {
    guard(|| {
        let Some(proof) = proof.as_mut() else {
            return fail(NlStatus::NullPointer, "null proof");
        };
        let (var, term) = match (text(var), text(term)) {
            (Ok(v), Ok(t)) => (v.trim(), t.trim_end()),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let term = match parse_term(term.strip_suffix('.').unwrap_or(term)) {
            Ok(t) => t,
            Err(e) => return fail(NlStatus::ParseError, e.to_string()),
        };
        match proof.state.apply_manual_subst(var, &term) {
            Ok(()) => NlStatus::Ok,
            Err(e) => fail(proof_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `proof` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_proof_undo(proof: *mut NlProof) -> NlStatus {
    guard(|| {
        let Some(proof) = proof.as_mut() else {
            return fail(NlStatus::NullPointer, "null proof");
        };
        match proof.state.undo() {
            Ok(()) => NlStatus::Ok,
            Err(e) => fail(proof_status(&e), e.to_string()),
        }
    })
}

/// True when every goal in the proof is closed. False for a null handle.
///
/// # Safety
/// `proof` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nl_proof_is_complete(proof: *const NlProof) -> bool {
    proof.as_ref().is_some_and(|p| p.state.is_complete())
}

/// The proof as JSON, in the shape the HTTP service uses.
///
/// # Safety
/// `proof` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_proof_tree_json(proof: *const NlProof, out: *mut *mut c_char) -> NlStatus {
    guard(|| match proof.as_ref() {
        Some(p) => match serde_json::to_string(&ProofView::new(&p.state)) {
            Ok(json) => give_string(json, out),
            Err(e) => fail(NlStatus::Panic, e.to_string()),
        },
        None => fail(NlStatus::NullPointer, "null proof"),
    })
}

impl Default for NlSolveOptions {
    fn default() -> Self {
        nl_solve_options_default()
    }
}

impl NlProgram {
    pub fn program(&self) -> &Program {
        &self.program
    }
}
