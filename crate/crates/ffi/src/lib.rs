//! C ABI for the obstacle-problem solvers: opaque handles, status codes,
//! and plain buffers. The header `include/oplab.h` is generated at build
//! time by cbindgen.
//!
//! Conventions:
//! * every fallible call returns an [`OplabStatus`] and writes its result
//!   through out-pointers, which are left untouched on failure;
//! * handles are created and released by matching `_new`/`_parse` and
//!   `_free` pairs; `_free` accepts null;
//! * panics never unwind across the boundary (they map to
//!   `OPLAB_STATUS_INTERNAL`).

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use oplab::geometry::BoxN;
use oplab::grid::{Grid, NodalFunction};
use oplab::measure::{total_variation, Measure};
use oplab::obstacle::{solve_naive, solve_op, Obstacle, OpResult, SolverOptions};
use oplab::operator::{assemble, CoefficientField, EllipticOperator};
use oplab::potential::{ball_average_potential, potential};
use oplab::textio::parse_measure;
use oplab::Error;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OplabStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SolveError = 4,
    BufferTooSmall = 5,
    Utf8Error = 6,
    Internal = 7,
}

fn status_of(e: &Error) -> OplabStatus {
    match e {
        Error::Parse(_) | Error::Config(_) => OplabStatus::ParseError,
        Error::Factorization(_) | Error::SolveFailed(_) | Error::SolverDiverged { .. } => {
            OplabStatus::SolveError
        }
        _ => OplabStatus::InvalidArgument,
    }
}

/// A parsed measure.
pub struct OplabMeasure {
    inner: Measure,
}

/// An assembled operator on a structured grid.
pub struct OplabOperator {
    grid: Grid,
    op: EllipticOperator,
}

/// Nodal values over the interior nodes of a grid.
pub struct OplabField {
    inner: NodalFunction,
}

/// Result of an obstacle solve.
pub struct OplabSolution {
    inner: OpResult,
}

fn guarded<F: FnOnce() -> OplabStatus>(f: F) -> OplabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => OplabStatus::Internal,
    }
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, OplabStatus> {
    if ptr.is_null() {
        return Err(OplabStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| OplabStatus::Utf8Error)
}

/// Parses a measure from the plain-text format into a new handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oplab_measure_parse(
    text: *const c_char,
    out: *mut *mut OplabMeasure,
) -> OplabStatus {
    guarded(|| {
        if out.is_null() {
            return OplabStatus::NullArgument;
        }
        let text = match cstr(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_measure(text) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(OplabMeasure { inner: m }));
                OplabStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a measure handle; null is accepted.
///
/// # Safety
/// `m` must come from `oplab_measure_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn oplab_measure_free(m: *mut OplabMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Total variation of the measure.
///
/// # Safety
/// `m` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn oplab_measure_total_variation(
    m: *const OplabMeasure,
    out: *mut f64,
) -> OplabStatus {
    guarded(|| {
        if m.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        *out = total_variation(&(*m).inner);
        OplabStatus::Ok
    })
}

/// Potential of the measure at a point (`z` is ignored for planar measures).
/// Atom locations return the signed infinity sentinel.
///
/// # Safety
/// `m` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn oplab_potential(
    m: *const OplabMeasure,
    x: f64,
    y: f64,
    z: f64,
    out: *mut f64,
) -> OplabStatus {
    guarded(|| {
        if m.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        *out = potential(&(*m).inner, [x, y, z]);
        OplabStatus::Ok
    })
}

/// Mean of the potential over the ball of radius `r` centered at the point.
///
/// # Safety
/// `m` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn oplab_ball_average(
    m: *const OplabMeasure,
    x: f64,
    y: f64,
    z: f64,
    r: f64,
    out: *mut f64,
) -> OplabStatus {
    guarded(|| {
        if m.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        match ball_average_potential(&(*m).inner, [x, y, z], r) {
            Ok(v) => {
                *out = v;
                OplabStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Assembles an operator on the rectangle `[x0, x1] x [y0, y1]` with `nx`
/// by `ny` subdivisions and the named coefficient field (`identity`,
/// `scaled:<c>`, `diag:<a>,<b>`, `nonsym`).
///
/// # Safety
/// `coeff` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn oplab_operator_new(
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    nx: usize,
    ny: usize,
    coeff: *const c_char,
    out: *mut *mut OplabOperator,
) -> OplabStatus {
    guarded(|| {
        if out.is_null() {
            return OplabStatus::NullArgument;
        }
        let coeff = match cstr(coeff) {
            Ok(c) => c,
            Err(s) => return s,
        };
        let build = || -> Result<OplabOperator, Error> {
            let rect = oplab::geometry::Rect::new(x0, y0, x1, y1)?;
            let grid = Grid::new(rect, nx, ny)?;
            let field = CoefficientField::from_selector(grid, coeff)?;
            let op = assemble(&grid, &field)?;
            Ok(OplabOperator { grid, op })
        };
        match build() {
            Ok(h) => {
                *out = Box::into_raw(Box::new(h));
                OplabStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases an operator handle; null is accepted.
///
/// # Safety
/// `op` must come from `oplab_operator_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn oplab_operator_free(op: *mut OplabOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of interior nodes of the operator's grid.
///
/// # Safety
/// `op` must be valid or null (null returns zero).
#[no_mangle]
pub unsafe extern "C" fn oplab_operator_interior_count(op: *const OplabOperator) -> usize {
    if op.is_null() {
        return 0;
    }
    (*op).grid.interior_count()
}

/// Solves the Dirichlet problem for the measure datum.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oplab_solve_dirichlet(
    op: *const OplabOperator,
    m: *const OplabMeasure,
    out: *mut *mut OplabField,
) -> OplabStatus {
    guarded(|| {
        if op.is_null() || m.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        match (*op).op.solve_dirichlet(&(*m).inner) {
            Ok(u) => {
                *out = Box::into_raw(Box::new(OplabField { inner: u }));
                OplabStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Solves the obstacle problem above the constant obstacle `psi_const`.
/// With `naive = 0` the datum is preprocessed (its capacity-singular
/// negative part moves to the reported reaction); any other value
/// discretizes the datum as-is.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oplab_solve_obstacle(
    op: *const OplabOperator,
    m: *const OplabMeasure,
    psi_const: f64,
    naive: i32,
    out: *mut *mut OplabSolution,
) -> OplabStatus {
    guarded(|| {
        if op.is_null() || m.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        let opr = &(*op).op;
        let grid = (*op).grid;
        let run = || -> Result<OpResult, Error> {
            let psi = Obstacle::constant(grid.interior_count(), psi_const, "constant")?;
            let opts = SolverOptions::tuned_for(grid.nx().max(grid.ny()));
            if naive == 0 {
                solve_op(opr, &(*m).inner, &psi, &opts)
            } else {
                let lcp = solve_naive(opr, &(*m).inner, &psi, &opts)?;
                Ok(OpResult {
                    u: lcp.u,
                    lambda0: lcp.reaction,
                    singular_reaction: Measure::new(
                        (*m).inner.dim(),
                        BoxN::from_rect(grid.rect()),
                    )?,
                    iterations: lcp.iterations,
                    comp_residual: lcp.comp_residual,
                    solver: lcp.solver,
                })
            }
        };
        match run() {
            Ok(res) => {
                *out = Box::into_raw(Box::new(OplabSolution { inner: res }));
                OplabStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a solution handle; null is accepted.
///
/// # Safety
/// `s` must come from `oplab_solve_obstacle` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn oplab_solution_free(s: *mut OplabSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Copies the solution field into a new handle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oplab_solution_u(
    s: *const OplabSolution,
    out: *mut *mut OplabField,
) -> OplabStatus {
    guarded(|| {
        if s.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        *out = Box::into_raw(Box::new(OplabField {
            inner: (*s).inner.u.clone(),
        }));
        OplabStatus::Ok
    })
}

/// Copies the regular reaction (nodal masses) into a new field handle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oplab_solution_reaction(
    s: *const OplabSolution,
    out: *mut *mut OplabField,
) -> OplabStatus {
    guarded(|| {
        if s.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        let sol = &(*s).inner;
        *out = Box::into_raw(Box::new(OplabField {
            inner: NodalFunction::new(sol.u.grid(), sol.lambda0.clone()),
        }));
        OplabStatus::Ok
    })
}

/// Iteration count of the solve (zero for a null handle).
///
/// # Safety
/// `s` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn oplab_solution_iterations(s: *const OplabSolution) -> usize {
    if s.is_null() {
        return 0;
    }
    (*s).inner.iterations
}

/// Complementarity residual of the solve.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oplab_solution_comp_residual(
    s: *const OplabSolution,
    out: *mut f64,
) -> OplabStatus {
    guarded(|| {
        if s.is_null() || out.is_null() {
            return OplabStatus::NullArgument;
        }
        *out = (*s).inner.comp_residual;
        OplabStatus::Ok
    })
}

/// Number of atoms in the singular reaction.
///
/// # Safety
/// `s` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn oplab_solution_singular_atom_count(s: *const OplabSolution) -> usize {
    if s.is_null() {
        return 0;
    }
    (*s).inner.singular_reaction.atoms().len()
}

/// Copies the singular-reaction atoms as `(x, y, z, mass)` quadruples.
/// `cap` counts quadruples; the number written goes to `written`.
///
/// # Safety
/// `buf` must point to at least `4 * cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn oplab_solution_singular_atoms(
    s: *const OplabSolution,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> OplabStatus {
    guarded(|| {
        if s.is_null() || buf.is_null() || written.is_null() {
            return OplabStatus::NullArgument;
        }
        let atoms = (*s).inner.singular_reaction.atoms();
        if atoms.len() > cap {
            return OplabStatus::BufferTooSmall;
        }
        for (i, a) in atoms.iter().enumerate() {
            *buf.add(4 * i) = a.location[0];
            *buf.add(4 * i + 1) = a.location[1];
            *buf.add(4 * i + 2) = a.location[2];
            *buf.add(4 * i + 3) = a.mass;
        }
        *written = atoms.len();
        OplabStatus::Ok
    })
}

/// Number of interior values in the field (zero for a null handle).
///
/// # Safety
/// `f` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn oplab_field_len(f: *const OplabField) -> usize {
    if f.is_null() {
        return 0;
    }
    (*f).inner.values().len()
}

/// Copies the field values into `buf` (capacity `len` doubles).
///
/// # Safety
/// `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn oplab_field_copy(
    f: *const OplabField,
    buf: *mut f64,
    len: usize,
) -> OplabStatus {
    guarded(|| {
        if f.is_null() || buf.is_null() {
            return OplabStatus::NullArgument;
        }
        let values = (*f).inner.values();
        if values.len() > len {
            return OplabStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        OplabStatus::Ok
    })
}

/// Reads node `i` of the field as position and value.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn oplab_field_node(
    f: *const OplabField,
    i: usize,
    x: *mut f64,
    y: *mut f64,
    value: *mut f64,
) -> OplabStatus {
    guarded(|| {
        if f.is_null() || x.is_null() || y.is_null() || value.is_null() {
            return OplabStatus::NullArgument;
        }
        let field = &(*f).inner;
        if i >= field.values().len() {
            return OplabStatus::InvalidArgument;
        }
        let (px, py) = field.grid().node_position(i);
        *x = px;
        *y = py;
        *value = field.values()[i];
        OplabStatus::Ok
    })
}

/// Releases a field handle; null is accepted.
///
/// # Safety
/// `f` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn oplab_field_free(f: *mut OplabField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn oplab_status_message(status: OplabStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        OplabStatus::Ok => b"ok\0",
        OplabStatus::NullArgument => b"null argument\0",
        OplabStatus::InvalidArgument => b"invalid argument\0",
        OplabStatus::ParseError => b"parse error\0",
        OplabStatus::SolveError => b"solve error\0",
        OplabStatus::BufferTooSmall => b"buffer too small\0",
        OplabStatus::Utf8Error => b"invalid utf-8\0",
        OplabStatus::Internal => b"internal error\0",
    };
    s.as_ptr() as *const c_char
}
