//! C ABI over `colred`.
//!
//! Objects cross the boundary as opaque handles that the caller releases with
//! the matching `*_free` function. Every fallible call returns a
//! [`ColredStatus`]; on failure [`colred_last_error`] describes the cause for
//! the calling thread. Strings returned by the library are released with
//! [`colred_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use colred::algos::{self, ReductionProgram};
use colred::bounds::lower_bound_rounds;
use colred::chromatic::chi_exact;
use colred::graph::{random_colored_tree, validate_proper};
use colred::nbhd::{self, BuildLimits, NbhdError, NbhdGraph};
use colred::{Adjacency, ColorAssignment, ColoredGraph, Delivery};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColredStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    /// A construction would exceed the configured vertex cap.
    CapExceeded = 4,
    /// The computation ran but failed, e.g. a simulation step error.
    Failed = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColredAlgo {
    Linial = 0,
    LinialFull = 1,
    Kw = 2,
    Delta1 = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColredDelivery {
    Set = 0,
    Multiset = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColredFamily {
    Nh1Multiset = 0,
    Nh1Set = 1,
    Nsl = 2,
    Nt = 3,
    Ntilde = 4,
}

/// Enum arguments arrive as plain integers so that out-of-range values from C
/// are rejected instead of being undefined behavior.
macro_rules! from_raw {
    ($t:ident { $($v:ident),+ }) => {
        impl $t {
            fn from_raw(x: u32) -> Result<Self, Fail> {
                [$($t::$v),+]
                    .into_iter()
                    .find(|v| *v as u32 == x)
                    .ok_or_else(|| invalid(format!("{x} is not a valid {}", stringify!($t))))
            }
        }
    };
}

from_raw!(ColredAlgo { Linial, LinialFull, Kw, Delta1 });
from_raw!(ColredDelivery { Set, Multiset });
from_raw!(ColredFamily { Nh1Multiset, Nh1Set, Nsl, Nt, Ntilde });

/// A tree or general graph with a proper initial coloring.
pub struct ColredGraph(ColoredGraph);

/// Output colors of a simulation.
pub struct ColredColoring(ColorAssignment);

/// A neighborhood graph.
pub struct ColredNbhd(NbhdGraph);

/// Chromatic bracket returned by [`colred_nbhd_chi`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ColredChi {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

struct Fail(ColredStatus, String);

impl From<NbhdError> for Fail {
    fn from(e: NbhdError) -> Self {
        let code = match e {
            NbhdError::CapExceeded { .. } => ColredStatus::CapExceeded,
            NbhdError::Invalid(_) => ColredStatus::InvalidArgument,
            _ => ColredStatus::Failed,
        };
        Fail(code, e.to_string())
    }
}

fn invalid(e: impl ToString) -> Fail {
    Fail(ColredStatus::InvalidArgument, e.to_string())
}

/// Runs `f`, converting errors and panics into a status and the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ColredStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ColredStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ColredStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail(ColredStatus::NullPointer, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(ColredStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(ColredStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Fail(ColredStatus::Parse, format!("invalid UTF-8: {e}")))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|e| Fail(ColredStatus::Failed, e.to_string()))
}

/// Message for the most recent failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn colred_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn colred_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn colred_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Random tree on `n` nodes, maximum degree `delta`, proper colors from `[1, m]`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_tree_random(n: usize, delta: usize, m: u32, seed: u64, out: *mut *mut ColredGraph) -> ColredStatus {
    guard(|| {
        let g = random_colored_tree(n, delta, m, seed).map_err(invalid)?;
        put(out, boxed(ColredGraph(g)))
    })
}

/// Parses a graph from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_graph_from_json(json: *const c_char, out: *mut *mut ColredGraph) -> ColredStatus {
    guard(|| {
        let g: ColoredGraph =
            serde_json::from_str(read_str(json)?).map_err(|e| Fail(ColredStatus::Parse, e.to_string()))?;
        put(out, boxed(ColredGraph(g)))
    })
}

/// Writes the JSON form of `g` to `*out`; free it with [`colred_string_free`].
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_graph_to_json(g: *const ColredGraph, out: *mut *mut c_char) -> ColredStatus {
    guard(|| {
        let s = serde_json::to_string(&deref(g)?.0).map_err(|e| Fail(ColredStatus::Failed, e.to_string()))?;
        put(out, to_c_string(s)?)
    })
}

/// Node count of `g`, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn colred_graph_node_count(g: *const ColredGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.n())
}

/// # Safety
/// `g` must be null or a handle from this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn colred_graph_free(g: *mut ColredGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

fn program(algo: ColredAlgo, m: u64, delta: usize) -> algos::Result<ReductionProgram> {
    match algo {
        ColredAlgo::Linial => algos::linial_step_program(m, delta),
        ColredAlgo::LinialFull => algos::linial_full_program(m, delta),
        ColredAlgo::Kw => algos::kw_step_program(m, delta),
        ColredAlgo::Delta1 => algos::delta_plus_one_program(m, delta),
    }
}

/// Runs a reduction program on `g`, using the graph's own `m` and degree cap.
/// `algo` is a [`ColredAlgo`] and `delivery` a [`ColredDelivery`].
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_color(
    g: *const ColredGraph,
    algo: u32,
    delivery: u32,
    out: *mut *mut ColredColoring,
) -> ColredStatus {
    guard(|| {
        let g = &deref(g)?.0;
        let prog = program(ColredAlgo::from_raw(algo)?, g.m() as u64, g.delta_cap()).map_err(invalid)?;
        let kind = match ColredDelivery::from_raw(delivery)? {
            ColredDelivery::Set => Delivery::Set,
            ColredDelivery::Multiset => Delivery::Multiset,
        };
        let res = colred::sim::run_with(g, &prog, kind, false).map_err(|e| Fail(ColredStatus::Failed, e.to_string()))?;
        put(out, boxed(ColredColoring(res.assignment)))
    })
}

/// Number of colored nodes, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn colred_coloring_len(c: *const ColredColoring) -> usize {
    c.as_ref().map_or(0, |c| c.0.colors.len())
}

/// Declared palette size, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn colred_coloring_palette(c: *const ColredColoring) -> u32 {
    c.as_ref().map_or(0, |c| c.0.palette)
}

/// Copies the colors into `buf`, which must hold `len >= colred_coloring_len(c)` entries.
///
/// # Safety
/// `c` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn colred_coloring_colors(c: *const ColredColoring, buf: *mut u32, len: usize) -> ColredStatus {
    guard(|| {
        let colors = &deref(c)?.0.colors;
        if buf.is_null() {
            return Err(Fail(ColredStatus::NullPointer, "null buffer".into()));
        }
        if len < colors.len() {
            return Err(invalid(format!("buffer holds {len} colors, need {}", colors.len())));
        }
        ptr::copy_nonoverlapping(colors.as_ptr(), buf, colors.len());
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a handle from this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn colred_coloring_free(c: *mut ColredColoring) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Sets `*proper` to whether `c` is a proper coloring of `g` within its palette.
///
/// # Safety
/// `g`, `c` must be live handles and `proper` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_validate_proper(g: *const ColredGraph, c: *const ColredColoring, proper: *mut bool) -> ColredStatus {
    guard(|| {
        let ok = validate_proper(&deref(g)?.0, &deref(c)?.0).map_err(invalid)?;
        put(proper, ok)
    })
}

/// Round lower bound for `C·Δ^(1+η)` colors.
///
/// # Safety
/// `rounds` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_lower_bound_rounds(delta: f64, c: f64, eta: f64, rounds: *mut u64) -> ColredStatus {
    guard(|| {
        let r = lower_bound_rounds(delta, c, eta).map_err(invalid)?;
        put(rounds, r.rounds)
    })
}

/// Builds a neighborhood graph of the [`ColredFamily`] `family`. `bound` is Δ for NH1 and NSL, D for NT and Ñ;
/// `r` is ignored for NH1. `cap` bounds the vertex count of every level.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_nbhd_build(
    family: u32,
    r: u32,
    m: u32,
    bound: usize,
    cap: usize,
    out: *mut *mut ColredNbhd,
) -> ColredStatus {
    guard(|| {
        let l = BuildLimits { max_vertices: cap };
        let g = match ColredFamily::from_raw(family)? {
            ColredFamily::Nh1Multiset => nbhd::build_nh1(m, bound, Delivery::Multiset, l)?,
            ColredFamily::Nh1Set => nbhd::build_nh1(m, bound, Delivery::Set, l)?,
            ColredFamily::Nsl => nbhd::build_nsl(r, m, bound, l)?,
            ColredFamily::Nt => nbhd::build_nt(r, m, bound, l)?,
            ColredFamily::Ntilde => nbhd::build_ntilde(r, m, bound, l)?,
        };
        put(out, boxed(ColredNbhd(g)))
    })
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn colred_nbhd_vertex_count(g: *const ColredNbhd) -> usize {
    g.as_ref().map_or(0, |g| g.0.node_count())
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn colred_nbhd_edge_count(g: *const ColredNbhd) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Writes the JSON form of `g` to `*out`; free it with [`colred_string_free`].
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_nbhd_to_json(g: *const ColredNbhd, out: *mut *mut c_char) -> ColredStatus {
    guard(|| {
        let s = deref(g)?.0.to_json().to_string();
        put(out, to_c_string(s)?)
    })
}

/// Brackets the chromatic number with at most `budget` search expansions.
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colred_nbhd_chi(g: *const ColredNbhd, budget: u64, out: *mut ColredChi) -> ColredStatus {
    guard(|| {
        let r = chi_exact(&deref(g)?.0, budget);
        put(out, ColredChi { lower: r.lower, upper: r.upper, exact: r.exact })
    })
}

/// # Safety
/// `g` must be null or a handle from this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn colred_nbhd_free(g: *mut ColredNbhd) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}
