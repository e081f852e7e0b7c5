//! C interface to the adcell library.
//!
//! Instances and scenarios cross the boundary as opaque handles. Every
//! fallible call returns an [`AdcellStatus`]; on failure the message is
//! available from [`adcell_last_error`] on the same thread. Strings handed
//! out by the library must be released with [`adcell_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use adcell::cli::CliError;
use adcell::harness::{
    monte_carlo, sample_scenario, solve_realized, HarnessError, McOptions, McPolicy,
};
use adcell::lp::{build_lp, solve_lp, LpError, LpMode, LpStatus, Variant};
use adcell::model::{ModelError, MoneyScale};
use adcell::offline_rounding::{approx_ratio_bound, round_offline, RoundingError};
use adcell::oracle::{
    expected_offline_opt_exact, offline_opt_exact, online_opt_exact, OracleError,
};
use adcell::rational::format_rational;
use adcell::sampling::trial_rng;
use adcell::{Instance, Scenario};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdcellStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    SizeGuard = 4,
    InvariantViolation = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdcellVariant {
    Budget = 0,
    Capacity = 1,
    BudgetCapacity = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdcellPolicy {
    Ipb = 0,
    Ipc = 1,
    Ipbc = 2,
    OfflineRound = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdcellOracle {
    Offline = 0,
    ExpectedOffline = 1,
    Online = 2,
}

/// Opaque instance handle.
pub struct AdcellInstance(Instance);

/// Opaque scenario handle.
pub struct AdcellScenario(Scenario);

struct Failure {
    status: AdcellStatus,
    message: String,
}

impl Failure {
    fn new(status: AdcellStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Input(_) => AdcellStatus::InvalidInput,
            CliError::SizeGuard(_) => AdcellStatus::SizeGuard,
            CliError::Invariant(_) => AdcellStatus::InvariantViolation,
        };
        Failure::new(status, e.to_string())
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                CliError::from(e).into()
            }
        }
    )*};
}

failure_from!(
    ModelError,
    LpError,
    OracleError,
    RoundingError,
    HarnessError
);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

fn guarded(body: impl FnOnce() -> Result<(), Failure>) -> AdcellStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            AdcellStatus::Ok
        }
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.status
        }
        Err(_) => {
            set_last_error("internal panic");
            AdcellStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, Failure> {
    if text.is_null() {
        return Err(Failure::new(
            AdcellStatus::NullPointer,
            "string argument is null",
        ));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| Failure::new(AdcellStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn deref<'a, T>(handle: *const T, what: &str) -> Result<&'a T, Failure> {
    handle
        .as_ref()
        .ok_or_else(|| Failure::new(AdcellStatus::NullPointer, format!("{what} handle is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::new(
            AdcellStatus::NullPointer,
            "output pointer is null",
        ));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let c = CString::new(text)
        .map_err(|_| Failure::new(AdcellStatus::InvalidInput, "output contains NUL"))?;
    if out.is_null() {
        return Err(Failure::new(
            AdcellStatus::NullPointer,
            "output pointer is null",
        ));
    }
    out.write(c.into_raw());
    Ok(())
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn adcell_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `text` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn adcell_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Parses and validates an instance from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_instance_from_json(
    json: *const c_char,
    out: *mut *mut AdcellInstance,
) -> AdcellStatus {
    guarded(|| {
        let inst = Instance::from_json(read_str(json)?)?;
        write_out(out, Box::into_raw(Box::new(AdcellInstance(inst))))
    })
}

/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_instance_to_json(
    inst: *const AdcellInstance,
    out: *mut *mut c_char,
) -> AdcellStatus {
    guarded(|| write_string(out, deref(inst, "instance")?.0.to_json()))
}

/// # Safety
/// `inst` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn adcell_instance_free(inst: *mut AdcellInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of advertisers, queries and customers; any output may be null.
///
/// # Safety
/// `inst` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_instance_dims(
    inst: *const AdcellInstance,
    advertisers: *mut usize,
    queries: *mut usize,
    customers: *mut usize,
) -> AdcellStatus {
    guarded(|| {
        let inst = &deref(inst, "instance")?.0;
        for (slot, v) in [
            (advertisers, inst.num_advertisers()),
            (queries, inst.num_queries()),
            (customers, inst.num_customers()),
        ] {
            if !slot.is_null() {
                slot.write(v);
            }
        }
        Ok(())
    })
}

/// Draws one arrival pattern with the trial generator for `(seed, 0)`.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_scenario_sample(
    inst: *const AdcellInstance,
    seed: u64,
    out: *mut *mut AdcellScenario,
) -> AdcellStatus {
    guarded(|| {
        let s = sample_scenario(&deref(inst, "instance")?.0, &mut trial_rng(seed, 0))?;
        write_out(out, Box::into_raw(Box::new(AdcellScenario(s))))
    })
}

/// Parses a scenario and checks it against `inst`.
///
/// # Safety
/// `inst` must be a live handle, `json` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_scenario_from_json(
    inst: *const AdcellInstance,
    json: *const c_char,
    out: *mut *mut AdcellScenario,
) -> AdcellStatus {
    guarded(|| {
        let inst = &deref(inst, "instance")?.0;
        let s: Scenario = serde_json::from_str(read_str(json)?)
            .map_err(|e| Failure::new(AdcellStatus::InvalidInput, e.to_string()))?;
        s.check(inst)?;
        write_out(out, Box::into_raw(Box::new(AdcellScenario(s))))
    })
}

/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_scenario_to_json(
    scenario: *const AdcellScenario,
    out: *mut *mut c_char,
) -> AdcellStatus {
    guarded(|| {
        let s = &deref(scenario, "scenario")?.0;
        write_string(out, serde_json::to_string(s).expect("scenarios serialize"))
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn adcell_scenario_free(scenario: *mut AdcellScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Exact optimum of the chosen relaxation as rational text such as `"9/5"`.
/// A null `scenario` selects the expectation form. An infeasible program
/// yields `InvariantViolation`.
///
/// # Safety
/// `inst` must be a live handle, `scenario` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_lp_objective(
    inst: *const AdcellInstance,
    variant: AdcellVariant,
    scenario: *const AdcellScenario,
    out: *mut *mut c_char,
) -> AdcellStatus {
    guarded(|| {
        let inst = &deref(inst, "instance")?.0;
        let variant = match variant {
            AdcellVariant::Budget => Variant::B,
            AdcellVariant::Capacity => Variant::C,
            AdcellVariant::BudgetCapacity => Variant::BC,
        };
        let mode = match scenario.as_ref() {
            Some(s) => LpMode::Realized(&s.0),
            None => LpMode::Expectation,
        };
        let sol = solve_lp(&build_lp(inst, variant, mode)?)?;
        if sol.status != LpStatus::Optimal {
            return Err(Failure::new(
                AdcellStatus::InvariantViolation,
                "program is infeasible",
            ));
        }
        write_string(out, format_rational(&sol.objective_value))
    })
}

/// Solves the realized program for `scenario`, rounds it with `seed`, and
/// writes a JSON object with `revenue`, `realized_lp`, `approx_bound` and
/// the `assignment` as `[query, advertiser]` pairs.
///
/// # Safety
/// `inst` and `scenario` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_round_offline(
    inst: *const AdcellInstance,
    scenario: *const AdcellScenario,
    seed: u64,
    out: *mut *mut c_char,
) -> AdcellStatus {
    guarded(|| {
        let inst = &deref(inst, "instance")?.0;
        let scenario = &deref(scenario, "scenario")?.0;
        let bound = approx_ratio_bound(inst)?;
        let (y, lp_value) = solve_realized(inst, scenario)?.ok_or_else(|| {
            Failure::new(
                AdcellStatus::InvariantViolation,
                "realized program is infeasible",
            )
        })?;
        let (x, _) = round_offline(inst, scenario, &y, &mut trial_rng(seed, 0))?;
        let money = MoneyScale::new(inst)?;
        let pairs: Vec<[usize; 2]> = x.assigned.iter().map(|(&j, &i)| [j, i]).collect();
        let value = serde_json::json!({
            "revenue": format_rational(&money.to_rational(money.revenue(&x))),
            "realized_lp": format_rational(&lp_value),
            "approx_bound": format_rational(&bound),
            "assignment": pairs,
        });
        write_string(out, value.to_string())
    })
}

/// Monte Carlo evaluation; writes the report as JSON.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_simulate(
    inst: *const AdcellInstance,
    policy: AdcellPolicy,
    trials: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> AdcellStatus {
    guarded(|| {
        let inst = &deref(inst, "instance")?.0;
        let policy = match policy {
            AdcellPolicy::Ipb => McPolicy::Ipb,
            AdcellPolicy::Ipc => McPolicy::Ipc,
            AdcellPolicy::Ipbc => McPolicy::Ipbc,
            AdcellPolicy::OfflineRound => McPolicy::OfflineRound,
        };
        let options = McOptions {
            jobs: Some(1),
            ..McOptions::new(trials, seed)
        };
        let report = monte_carlo(inst, policy, options)?;
        write_string(
            out,
            serde_json::to_string(&report).expect("reports serialize"),
        )
    })
}

/// Exact oracle value as rational text. `Offline` needs a scenario; the
/// others ignore it.
///
/// # Safety
/// `inst` must be a live handle, `scenario` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn adcell_oracle(
    inst: *const AdcellInstance,
    which: AdcellOracle,
    scenario: *const AdcellScenario,
    out: *mut *mut c_char,
) -> AdcellStatus {
    guarded(|| {
        let inst = &deref(inst, "instance")?.0;
        let value = match which {
            AdcellOracle::Offline => offline_opt_exact(inst, &deref(scenario, "scenario")?.0)?.0,
            AdcellOracle::ExpectedOffline => expected_offline_opt_exact(inst)?,
            AdcellOracle::Online => online_opt_exact(inst)?,
        };
        write_string(out, format_rational(&value))
    })
}
