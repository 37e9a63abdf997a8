//! C ABI for the interview, assessment and rendering pipeline.
//!
//! Conventions:
//! - Every fallible function returns a [`PainterStatus`]; on failure
//!   [`painter_last_error`] describes what went wrong on the calling thread.
//! - Handles are opaque. Free them with the matching `*_free` function.
//! - Strings and buffers returned through out-pointers are owned by the
//!   caller and released with [`painter_string_free`] / [`painter_bytes_free`].
//! - JSON payloads use the same shapes as the HTTP API.
//! - Panics never cross the boundary; they surface as `PAINTER_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use painter_core::assessment::assess_state;
use painter_core::dialogue::{DialogueEngine, DialogueError, DialogueState, EmotionHint};
use painter_core::persona::{AdjectiveTable, Categorization, StyleMap, DEFAULT_DOMINANCE_BAND};
use painter_core::render::{render_portrait, RasterImage};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PainterStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    SessionClosed = 4,
    SessionOpen = 5,
    Image = 6,
    Render = 7,
    Internal = 8,
    Panic = 9,
}

/// Shared, immutable configuration: interview script, lexicon, style map.
pub struct PainterEngine {
    dialogue: DialogueEngine,
    styles: StyleMap,
    adjectives: AdjectiveTable,
    band: f64,
}

/// One sitter's interview.
pub struct PainterSession {
    state: DialogueState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PainterStatus, String);

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PainterStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PainterStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            PainterStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PainterStatus::NullArgument, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(PainterStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_json(out: *mut *mut c_char, value: &impl serde::Serialize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let s = serde_json::to_string(value)
        .map_err(|e| Failure(PainterStatus::Internal, e.to_string()))?;
    let c = CString::new(s).map_err(|e| Failure(PainterStatus::Internal, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn painter_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates an engine with the bundled script, lexicon and tables.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn painter_engine_new(out: *mut *mut PainterEngine) -> PainterStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let engine = PainterEngine {
            dialogue: DialogueEngine::with_defaults(),
            styles: StyleMap::builtin(),
            adjectives: AdjectiveTable::builtin(),
            band: DEFAULT_DOMINANCE_BAND,
        };
        *out = Box::into_raw(Box::new(engine));
        Ok(())
    })
}

/// # Safety
/// `engine` must come from [`painter_engine_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn painter_engine_free(engine: *mut PainterEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Starts an interview. Writes the session handle and the greeting turn
/// as JSON.
///
/// # Safety
/// Pointers must be valid; `engine` must outlive the session.
#[no_mangle]
pub unsafe extern "C" fn painter_session_start(
    engine: *const PainterEngine,
    out_session: *mut *mut PainterSession,
    out_turn_json: *mut *mut c_char,
) -> PainterStatus {
    guard(|| {
        let engine = ref_arg(engine, "engine")?;
        if out_session.is_null() {
            return Err(null("out_session"));
        }
        let (state, turn) = engine.dialogue.start_session();
        write_json(out_turn_json, &turn)?;
        *out_session = Box::into_raw(Box::new(PainterSession { state }));
        Ok(())
    })
}

/// # Safety
/// `session` must come from [`painter_session_start`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn painter_session_free(session: *mut PainterSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Submits one sitter utterance. `emotion_hint` may be NULL.
///
/// # Safety
/// Pointers must be valid; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn painter_session_turn(
    engine: *const PainterEngine,
    session: *mut PainterSession,
    text: *const c_char,
    emotion_hint: *const c_char,
    out_turn_json: *mut *mut c_char,
) -> PainterStatus {
    guard(|| {
        let engine = ref_arg(engine, "engine")?;
        let session = session.as_mut().ok_or_else(|| null("session"))?;
        let text = str_arg(text, "text")?;
        let hint = if emotion_hint.is_null() {
            None
        } else {
            Some(
                str_arg(emotion_hint, "emotion_hint")?
                    .parse::<EmotionHint>()
                    .map_err(|e| Failure(PainterStatus::InvalidArgument, e))?,
            )
        };
        let mut next = session.state.clone();
        let turn = engine
            .dialogue
            .user_turn(&mut next, text, hint)
            .map_err(|e| match e {
                DialogueError::SessionClosed => {
                    Failure(PainterStatus::SessionClosed, e.to_string())
                }
                other => Failure(PainterStatus::Internal, other.to_string()),
            })?;
        write_json(out_turn_json, &turn)?;
        session.state = next;
        Ok(())
    })
}

/// 1 if the interview has closed, 0 if not, -1 for a NULL handle.
///
/// # Safety
/// `session` must be a valid handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn painter_session_is_closed(session: *const PainterSession) -> c_int {
    match session.as_ref() {
        Some(s) => c_int::from(s.state.is_closed()),
        None => -1,
    }
}

/// Profile, cell and adjectives of a closed interview, as JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn painter_session_assess(
    engine: *const PainterEngine,
    session: *const PainterSession,
    out_json: *mut *mut c_char,
) -> PainterStatus {
    guard(|| {
        let engine = ref_arg(engine, "engine")?;
        let session = ref_arg(session, "session")?;
        if !session.state.is_closed() {
            return Err(Failure(
                PainterStatus::SessionOpen,
                "interview has not finished".into(),
            ));
        }
        let a = assess_state(
            &engine.dialogue,
            &session.state,
            engine.band,
            &engine.adjectives,
        )
        .map_err(|e| Failure(PainterStatus::Internal, e.to_string()))?;
        write_json(out_json, &a)
    })
}

/// Polarity score of `text` as JSON.
///
/// # Safety
/// Pointers must be valid; `text` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn painter_score_text(
    engine: *const PainterEngine,
    text: *const c_char,
    out_json: *mut *mut c_char,
) -> PainterStatus {
    guard(|| {
        let engine = ref_arg(engine, "engine")?;
        let text = str_arg(text, "text")?;
        write_json(out_json, &engine.dialogue.score(text))
    })
}

/// Renders a PNG or JPEG portrait in the style of `cell` (`E+A+`,
/// `neutral`, ...). Writes a newly allocated PNG buffer and its length.
///
/// # Safety
/// `image` must point to `image_len` readable bytes; out-pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn painter_render_png(
    engine: *const PainterEngine,
    image: *const u8,
    image_len: usize,
    cell: *const c_char,
    seed: u64,
    out_png: *mut *mut u8,
    out_len: *mut usize,
) -> PainterStatus {
    guard(|| {
        let engine = ref_arg(engine, "engine")?;
        if image.is_null() {
            return Err(null("image"));
        }
        if out_png.is_null() || out_len.is_null() {
            return Err(null("out"));
        }
        let cell: Categorization = str_arg(cell, "cell")?
            .parse()
            .map_err(|e| Failure(PainterStatus::InvalidArgument, format!("{e}")))?;
        let bytes = std::slice::from_raw_parts(image, image_len);
        let img =
            RasterImage::decode(bytes).map_err(|e| Failure(PainterStatus::Image, e.to_string()))?;
        let render = render_portrait(&img, engine.styles.style_for(&cell), seed, None)
            .map_err(|e| Failure(PainterStatus::Render, e.to_string()))?;
        let png = render
            .final_image()
            .encode_png()
            .map_err(|e| Failure(PainterStatus::Render, e.to_string()))?;
        let boxed = png.into_boxed_slice();
        *out_len = boxed.len();
        *out_png = Box::into_raw(boxed).cast::<u8>();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn painter_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `buf` and `len` must be exactly what [`painter_render_png`] returned.
#[no_mangle]
pub unsafe extern "C" fn painter_bytes_free(buf: *mut u8, len: usize) {
    if !buf.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buf, len)));
    }
}
