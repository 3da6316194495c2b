//! C interface to `qcournot`.
//!
//! Every function returns a [`QcStatus`]. On failure the message is kept per
//! thread and can be read with [`qc_last_error_message`]. Results are written
//! through out-pointers, which are left untouched on failure. Panics are caught
//! at the boundary and reported as `QC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qcournot::cli::{self, Command, RunOptions};
use qcournot::closed_form::{block_inverse, two_group_equilibrium, TwoGroupParams};
use qcournot::config::{OutputFormat, Preset, RunConfig};
use qcournot::energy::{constrained_equilibrium, ClampMode, EnergyKind, EnergyModel};
use qcournot::hardware::{
    asymptotic_quantities, critical_scale, critical_scale_expanding, HardwareConstants, HardwareKind,
};
use qcournot::market::{solve_equilibrium, MarketParams};
use qcournot::numerics::DenseMatrix;
use qcournot::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Singular = 4,
    Degenerate = 5,
    Domain = 6,
    NoConvergence = 7,
    NoCrossing = 8,
    InvalidBracket = 9,
    NotFinite = 10,
    Config = 11,
    Panic = 12,
}

impl From<&Error> for QcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => QcStatus::DimensionMismatch,
            Error::SingularMatrix { .. } => QcStatus::Singular,
            Error::DegenerateDenominator { .. } => QcStatus::Degenerate,
            Error::Domain(_) => QcStatus::Domain,
            Error::NoConvergence { .. } => QcStatus::NoConvergence,
            Error::NoSignChange { .. } => QcStatus::NoCrossing,
            Error::InvalidBracket { .. } => QcStatus::InvalidBracket,
            Error::NotFinite { .. } => QcStatus::NotFinite,
            Error::InvalidParams(_) => QcStatus::InvalidArgument,
            Error::Config(_) => QcStatus::Config,
        }
    }
}

/// Values for the `kind` field of [`QcEnergyModel`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcEnergyKind {
    /// `beta * log2(q)^exponent`, defined for `q > 1`.
    LogPower = 0,
    /// `beta * q^exponent`.
    PowerLaw = 1,
}

/// Values for the `mode` argument of [`qc_constrained_equilibrium`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcClampMode {
    PaperClamp = 0,
    CapSaturated = 1,
    IteratedBestResponse = 2,
}

/// Values for the hardware `kind` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcHardwareKind {
    Rydberg = 0,
    IonTrap = 1,
    ClassicalHpc = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

struct Failure(QcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(QcStatus::from(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(QcStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: String) -> Failure {
    Failure(QcStatus::InvalidArgument, msg)
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> QcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            QcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(p: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn opt_str<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread, or null if none failed yet.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// General market with `n` firms.
pub struct QcMarket {
    params: MarketParams,
}

/// Creates a market from intercepts, own sensitivities and a row-major
/// `n * n` cross-sensitivity matrix whose diagonal is ignored.
///
/// # Safety
/// `a` and `theta` must point to `n` doubles, `cross` to `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_market_new(
    n: usize,
    a: *const f64,
    theta: *const f64,
    cross: *const f64,
    out: *mut *mut QcMarket,
) -> QcStatus {
    guard(|| {
        let len = n
            .checked_mul(n)
            .ok_or_else(|| invalid(format!("n = {n} is too large")))?;
        let a = slice(a, n, "a")?.to_vec();
        let theta = slice(theta, n, "theta")?.to_vec();
        let cross = DenseMatrix::new(n, n, slice(cross, len, "cross")?.to_vec())?;
        let params = MarketParams::from_cross(a, theta, &cross)?;
        write(out, "out", Box::into_raw(Box::new(QcMarket { params })))
    })
}

/// # Safety
/// `market` must come from [`qc_market_new`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qc_market_free(market: *mut QcMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Number of firms, or zero for a null handle.
///
/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qc_market_size(market: *const QcMarket) -> usize {
    market.as_ref().map_or(0, |m| m.params.n())
}

/// Solves the interior equilibrium. Each output array holds `len` doubles and
/// may be null when not wanted; `len` must equal the number of firms.
///
/// # Safety
/// Non-null output pointers must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qc_market_equilibrium(
    market: *const QcMarket,
    len: usize,
    quantities: *mut f64,
    prices: *mut f64,
    profits: *mut f64,
) -> QcStatus {
    guard(|| {
        let m = deref(market, "market")?;
        if len != m.params.n() {
            return Err(Error::DimensionMismatch {
                expected: m.params.n(),
                found: len,
            }
            .into());
        }
        let eq = solve_equilibrium(&m.params)?;
        for (dst, src) in [
            (quantities, &eq.quantities),
            (prices, &eq.prices),
            (profits, &eq.profits),
        ] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
            }
        }
        Ok(())
    })
}

/// Parameters of the two-group model.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcTwoGroupParams {
    pub n_q: usize,
    pub n_c: usize,
    pub a_q: f64,
    pub a_c: f64,
    pub theta_q: f64,
    pub theta_c: f64,
    pub gamma_qq: f64,
    pub gamma_cc: f64,
    pub gamma_qc: f64,
}

impl From<QcTwoGroupParams> for TwoGroupParams {
    fn from(p: QcTwoGroupParams) -> Self {
        TwoGroupParams {
            n_q: p.n_q,
            n_c: p.n_c,
            a_q: p.a_q,
            a_c: p.a_c,
            theta_q: p.theta_q,
            theta_c: p.theta_c,
            gamma_qq: p.gamma_qq,
            gamma_cc: p.gamma_cc,
            gamma_qc: p.gamma_qc,
        }
    }
}

/// Validated two-group market.
pub struct QcTwoGroup {
    params: TwoGroupParams,
}

/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_two_group_new(params: *const QcTwoGroupParams, out: *mut *mut QcTwoGroup) -> QcStatus {
    guard(|| {
        let params = TwoGroupParams::from(*deref(params, "params")?);
        params.validate()?;
        write(out, "out", Box::into_raw(Box::new(QcTwoGroup { params })))
    })
}

/// # Safety
/// `market` must come from [`qc_two_group_new`] and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qc_two_group_free(market: *mut QcTwoGroup) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Per-firm equilibrium of each group.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QcGroupEquilibrium {
    pub q_q: f64,
    pub q_c: f64,
    pub p_q: f64,
    pub p_c: f64,
    pub pi_q: f64,
    pub pi_c: f64,
    pub denominator: f64,
}

/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_two_group_equilibrium(market: *const QcTwoGroup, out: *mut QcGroupEquilibrium) -> QcStatus {
    guard(|| {
        let eq = two_group_equilibrium(&deref(market, "market")?.params)?;
        write(
            out,
            "out",
            QcGroupEquilibrium {
                q_q: eq.q_q,
                q_c: eq.q_c,
                p_q: eq.p_q,
                p_c: eq.p_c,
                pi_q: eq.pi_q,
                pi_c: eq.pi_c,
                denominator: eq.denominator,
            },
        )
    })
}

/// Entries of the inverse of the two-group FOC matrix. The within-group
/// off-diagonal entries are NaN with the `has_` flag cleared when the group
/// has a single firm.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QcBlockInverse {
    pub omega_qq: f64,
    pub varpi_qq: f64,
    pub has_varpi_qq: bool,
    pub omega_cc: f64,
    pub varpi_cc: f64,
    pub has_varpi_cc: bool,
    pub omega_qc: f64,
}

/// # Safety
/// `market` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_two_group_block_inverse(market: *const QcTwoGroup, out: *mut QcBlockInverse) -> QcStatus {
    guard(|| {
        let b = block_inverse(&deref(market, "market")?.params)?;
        write(
            out,
            "out",
            QcBlockInverse {
                omega_qq: b.omega_qq,
                varpi_qq: b.varpi_qq.unwrap_or(f64::NAN),
                has_varpi_qq: b.varpi_qq.is_some(),
                omega_cc: b.omega_cc,
                varpi_cc: b.varpi_cc.unwrap_or(f64::NAN),
                has_varpi_cc: b.varpi_cc.is_some(),
                omega_qc: b.omega_qc,
            },
        )
    })
}

/// Energy model; `kind` takes a [`QcEnergyKind`] value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcEnergyModel {
    pub kind: u32,
    pub beta: f64,
    pub exponent: f64,
}

fn energy_model(m: &QcEnergyModel) -> Result<EnergyModel, Failure> {
    let kind = match m.kind {
        k if k == QcEnergyKind::LogPower as u32 => EnergyKind::LogPower,
        k if k == QcEnergyKind::PowerLaw as u32 => EnergyKind::PowerLaw,
        k => return Err(invalid(format!("unknown energy kind {k}"))),
    };
    Ok(EnergyModel::new(kind, m.beta, m.exponent)?)
}

fn clamp_mode(mode: u32) -> Result<ClampMode, Failure> {
    match mode {
        m if m == QcClampMode::PaperClamp as u32 => Ok(ClampMode::PaperClamp),
        m if m == QcClampMode::CapSaturated as u32 => Ok(ClampMode::CapSaturated),
        m if m == QcClampMode::IteratedBestResponse as u32 => Ok(ClampMode::IteratedBestResponse),
        m => Err(invalid(format!("unknown clamp mode {m}"))),
    }
}

fn hardware_kind(kind: u32) -> Result<HardwareKind, Failure> {
    match kind {
        k if k == QcHardwareKind::Rydberg as u32 => Ok(HardwareKind::Rydberg),
        k if k == QcHardwareKind::IonTrap as u32 => Ok(HardwareKind::IonTrap),
        k if k == QcHardwareKind::ClassicalHpc as u32 => Ok(HardwareKind::ClassicalHpc),
        k => Err(invalid(format!("unknown hardware kind {k}"))),
    }
}

/// Energy drawn by one firm producing `q`.
///
/// # Safety
/// `model` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_energy_power(model: *const QcEnergyModel, q: f64, out: *mut f64) -> QcStatus {
    guard(|| {
        let m = energy_model(deref(model, "model")?)?;
        write(out, "out", m.power(q)?)
    })
}

/// Largest per-firm quantity whose energy stays within `e`; may be +inf.
///
/// # Safety
/// `model` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_energy_quantity_cap(model: *const QcEnergyModel, e: f64, out: *mut f64) -> QcStatus {
    guard(|| {
        let m = energy_model(deref(model, "model")?)?;
        write(out, "out", m.quantity_cap(e)?)
    })
}

/// Group outcome under a per-firm energy budget.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QcConstrained {
    pub cap_q: f64,
    pub cap_c: f64,
    pub q_q: f64,
    pub q_c: f64,
    pub pi_q: f64,
    pub pi_c: f64,
    pub binding_q: bool,
    pub binding_c: bool,
    /// Best-response sweeps used; zero for the closed-form modes.
    pub sweeps: usize,
}

/// `mode` takes a [`QcClampMode`] value.
///
/// # Safety
/// `market`, `model_q` and `model_c` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_constrained_equilibrium(
    market: *const QcTwoGroup,
    model_q: *const QcEnergyModel,
    model_c: *const QcEnergyModel,
    energy_cap: f64,
    mode: u32,
    out: *mut QcConstrained,
) -> QcStatus {
    guard(|| {
        let p = &deref(market, "market")?.params;
        let mq = energy_model(deref(model_q, "model_q")?)?;
        let mc = energy_model(deref(model_c, "model_c")?)?;
        let c = constrained_equilibrium(p, &mq, &mc, energy_cap, clamp_mode(mode)?)?;
        write(
            out,
            "out",
            QcConstrained {
                cap_q: c.cap_q,
                cap_c: c.cap_c,
                q_q: c.q_q,
                q_c: c.q_c,
                pi_q: c.pi_q,
                pi_c: c.pi_c,
                binding_q: c.binding_q,
                binding_c: c.binding_c,
                sweeps: c.sweeps,
            },
        )
    })
}

/// Hardware energy constants in Joules.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QcHardwareConstants {
    pub alpha: f64,
    pub mu: f64,
    pub beta_rydberg: f64,
    pub beta_ion: f64,
    pub beta_classical: f64,
}

impl From<QcHardwareConstants> for HardwareConstants {
    fn from(c: QcHardwareConstants) -> Self {
        HardwareConstants {
            alpha: c.alpha,
            mu: c.mu,
            beta_rydberg: c.beta_rydberg,
            beta_ion: c.beta_ion,
            beta_classical: c.beta_classical,
        }
    }
}

/// Writes the built-in hardware constants.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_hardware_constants_default(out: *mut QcHardwareConstants) -> QcStatus {
    guard(|| {
        let c = HardwareConstants::default();
        write(
            out,
            "out",
            QcHardwareConstants {
                alpha: c.alpha,
                mu: c.mu,
                beta_rydberg: c.beta_rydberg,
                beta_ion: c.beta_ion,
                beta_classical: c.beta_classical,
            },
        )
    })
}

unsafe fn constants_or_default(c: *const QcHardwareConstants) -> HardwareConstants {
    c.as_ref().map_or_else(HardwareConstants::default, |c| (*c).into())
}

/// Energy of one run of size `n` on `kind`. Null `constants` selects the defaults.
///
/// # Safety
/// `constants` must be null or readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_algorithm_energy(
    kind: u32,
    n: f64,
    constants: *const QcHardwareConstants,
    out: *mut f64,
) -> QcStatus {
    guard(|| {
        let c = constants_or_default(constants);
        write(out, "out", c.algorithm_energy(hardware_kind(kind)?, n)?)
    })
}

/// Intercept at which both groups draw the same per-firm energy.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QcCriticalScale {
    pub a_star: f64,
    pub e_q: f64,
    pub e_c: f64,
    pub residual: f64,
    /// Bracket actually searched.
    pub lo: f64,
    pub hi: f64,
}

/// Searches `[lo, hi]` for the critical intercept. With `expand` set the upper
/// end is widened by factors of ten while no crossing is found.
/// Returns `QC_STATUS_NO_CROSSING` when the energy gap keeps one sign.
///
/// # Safety
/// `market` must be a live handle, `constants` null or readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_critical_scale(
    market: *const QcTwoGroup,
    quantum: u32,
    classical: u32,
    constants: *const QcHardwareConstants,
    lo: f64,
    hi: f64,
    expand: bool,
    out: *mut QcCriticalScale,
) -> QcStatus {
    guard(|| {
        let p = &deref(market, "market")?.params;
        let c = constants_or_default(constants);
        let (quantum, classical) = (hardware_kind(quantum)?, hardware_kind(classical)?);
        let s = if expand {
            critical_scale_expanding(p, quantum, classical, &c, lo, hi)?
        } else {
            critical_scale(p, quantum, classical, &c, lo, hi)?
        };
        write(
            out,
            "out",
            QcCriticalScale {
                a_star: s.a_star,
                e_q: s.e_q,
                e_c: s.e_c,
                residual: s.residual,
                lo: s.lo,
                hi: s.hi,
            },
        )
    })
}

/// Large-population approximations of the per-firm quantities at intercept `a`.
///
/// # Safety
/// `market` must be a live handle; `q_q` and `q_c` writable.
#[no_mangle]
pub unsafe extern "C" fn qc_asymptotic_quantities(
    market: *const QcTwoGroup,
    a: f64,
    q_q: *mut f64,
    q_c: *mut f64,
) -> QcStatus {
    guard(|| {
        let (x, y) = asymptotic_quantities(&deref(market, "market")?.params, a)?;
        write(q_q, "q_q", x)?;
        write(q_c, "q_c", y)
    })
}

/// Runs a CLI command (`equilibrium`, `sweep-energy`, `sweep-ratio`,
/// `sweep-scale`, `threshold`, `verify`) in process.
///
/// The config comes from `config_json` or the `preset` name; at most one may
/// be non-null. `seed` may be null for the default; `trials` of zero keeps the
/// per-suite defaults. On `QC_STATUS_OK` the command's exit code goes to
/// `exit_code`, the report to `report` and the rendered table (or null) to
/// `table`. Free both strings with [`qc_string_free`].
///
/// # Safety
/// String arguments must be null or NUL-terminated; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn qc_run_command(
    command: *const c_char,
    config_json: *const c_char,
    preset: *const c_char,
    seed: *const u64,
    trials: usize,
    exit_code: *mut i32,
    report: *mut *mut c_char,
    table: *mut *mut c_char,
) -> QcStatus {
    guard(|| {
        let name = opt_str(command, "command")?.ok_or_else(|| null("command"))?;
        let command = Command::parse(name)?;
        let config = match (opt_str(config_json, "config_json")?, opt_str(preset, "preset")?) {
            (Some(_), Some(_)) => return Err(Error::Config("give either a config or a preset, not both".into()).into()),
            (Some(text), None) => Some(RunConfig::from_json(text)?),
            (None, Some(name)) => Some(Preset::parse(name)?.config()),
            (None, None) => None,
        };
        if exit_code.is_null() || report.is_null() || table.is_null() {
            return Err(null("output pointer"));
        }
        let opts = RunOptions {
            seed: seed.as_ref().copied(),
            trials: (trials > 0).then_some(trials),
        };
        let outcome = cli::execute(command, config.as_ref(), opts)?;
        let format = config.as_ref().map_or(OutputFormat::Csv, |c| c.output.format);
        exit_code.write(outcome.exit_code);
        table.write(outcome.render_table(format).map_or(ptr::null_mut(), into_c_string));
        report.write(into_c_string(outcome.report));
        Ok(())
    })
}
