use std::ffi::{CStr, CString};
use std::ptr;

use painter_core::render::sample_portrait;
use painter_ffi::*;

struct Engine(*mut PainterEngine);

impl Engine {
    fn new() -> Self {
        let mut e = ptr::null_mut();
        assert_eq!(unsafe { painter_engine_new(&mut e) }, PainterStatus::Ok);
        Self(e)
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        unsafe { painter_engine_free(self.0) }
    }
}

fn take_json(p: *mut std::ffi::c_char) -> serde_json::Value {
    assert!(!p.is_null());
    let v = serde_json::from_str(unsafe { CStr::from_ptr(p) }.to_str().unwrap()).unwrap();
    unsafe { painter_string_free(p) };
    v
}

fn last_error() -> String {
    let p = painter_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// The sitter utterances of the shipped sample transcript.
fn answers() -> Vec<String> {
    include_str!("../../core/data/sample_transcript.txt")
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.trim_start_matches("[joy] ").to_string())
        .collect()
}

#[test]
fn full_interview_through_the_abi() {
    let engine = Engine::new();
    let (mut session, mut json) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(
        unsafe { painter_session_start(engine.0, &mut session, &mut json) },
        PainterStatus::Ok
    );
    assert_eq!(take_json(json)["kind"], "greeting");
    assert_eq!(unsafe { painter_session_is_closed(session) }, 0);

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { painter_session_assess(engine.0, session, &mut out) },
        PainterStatus::SessionOpen
    );

    let joy = CString::new("joy").unwrap();
    for a in answers() {
        let text = CString::new(a).unwrap();
        let mut turn = ptr::null_mut();
        let status = unsafe {
            painter_session_turn(engine.0, session, text.as_ptr(), joy.as_ptr(), &mut turn)
        };
        assert_eq!(status, PainterStatus::Ok, "{}", last_error());
        take_json(turn);
    }
    assert_eq!(unsafe { painter_session_is_closed(session) }, 1);

    let mut turn = ptr::null_mut();
    let text = CString::new("one more").unwrap();
    assert_eq!(
        unsafe { painter_session_turn(engine.0, session, text.as_ptr(), ptr::null(), &mut turn) },
        PainterStatus::SessionClosed
    );
    assert!(turn.is_null());

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { painter_session_assess(engine.0, session, &mut out) },
        PainterStatus::Ok
    );
    let a = take_json(out);
    assert_eq!(a["cell"], "E+A+");
    assert_eq!(a["answers"].as_array().unwrap().len(), 5);
    unsafe { painter_session_free(session) };
}

#[test]
fn null_and_bad_arguments_report_errors() {
    let engine = Engine::new();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { painter_score_text(engine.0, ptr::null(), &mut out) },
        PainterStatus::NullArgument
    );
    assert!(last_error().contains("text"));

    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { painter_score_text(engine.0, bad.as_ptr().cast(), &mut out) },
        PainterStatus::InvalidUtf8
    );

    let (mut session, mut json) = (ptr::null_mut(), ptr::null_mut());
    unsafe { painter_session_start(engine.0, &mut session, &mut json) };
    take_json(json);
    let (text, hint) = (CString::new("hi").unwrap(), CString::new("grumpy").unwrap());
    let mut turn = ptr::null_mut();
    assert_eq!(
        unsafe { painter_session_turn(engine.0, session, text.as_ptr(), hint.as_ptr(), &mut turn) },
        PainterStatus::InvalidArgument
    );
    unsafe { painter_session_free(session) };
    assert_eq!(unsafe { painter_session_is_closed(ptr::null()) }, -1);

    // Success clears the previous message.
    let text = CString::new("great").unwrap();
    assert_eq!(
        unsafe { painter_score_text(engine.0, text.as_ptr(), &mut out) },
        PainterStatus::Ok
    );
    assert!(painter_last_error().is_null());
    assert_eq!(take_json(out)["class"], "positive");
}

#[test]
fn render_is_deterministic_png() {
    let engine = Engine::new();
    let src = sample_portrait(64, 1).encode_png().unwrap();
    let cell = CString::new("O-N+").unwrap();
    let render = || {
        let (mut buf, mut len) = (ptr::null_mut(), 0usize);
        let status = unsafe {
            painter_render_png(
                engine.0,
                src.as_ptr(),
                src.len(),
                cell.as_ptr(),
                5,
                &mut buf,
                &mut len,
            )
        };
        assert_eq!(status, PainterStatus::Ok, "{}", last_error());
        let bytes = unsafe { std::slice::from_raw_parts(buf, len) }.to_vec();
        unsafe { painter_bytes_free(buf, len) };
        bytes
    };
    let a = render();
    assert_eq!(&a[..8], b"\x89PNG\r\n\x1a\n");
    assert_eq!(a, render());

    let (mut buf, mut len) = (ptr::null_mut(), 0usize);
    let junk = b"not an image";
    assert_eq!(
        unsafe {
            painter_render_png(
                engine.0,
                junk.as_ptr(),
                junk.len(),
                cell.as_ptr(),
                5,
                &mut buf,
                &mut len,
            )
        },
        PainterStatus::Image
    );
    let small = sample_portrait(32, 0).encode_png().unwrap();
    assert_eq!(
        unsafe {
            painter_render_png(
                engine.0,
                small.as_ptr(),
                small.len(),
                cell.as_ptr(),
                5,
                &mut buf,
                &mut len,
            )
        },
        PainterStatus::Render
    );
    assert!(last_error().contains("at least 64"));
    let bad_cell = CString::new("E+E-").unwrap();
    assert_eq!(
        unsafe {
            painter_render_png(
                engine.0,
                src.as_ptr(),
                src.len(),
                bad_cell.as_ptr(),
                5,
                &mut buf,
                &mut len,
            )
        },
        PainterStatus::InvalidArgument
    );
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/painter.h")).unwrap();
    for name in [
        "painter_last_error",
        "painter_engine_new",
        "painter_engine_free",
        "painter_session_start",
        "painter_session_turn",
        "painter_session_is_closed",
        "painter_session_assess",
        "painter_session_free",
        "painter_score_text",
        "painter_render_png",
        "painter_string_free",
        "painter_bytes_free",
    ] {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct PainterEngine PainterEngine;"));
    assert!(header.contains("PAINTER_STATUS_OK = 0"));
}

/// Compiles a C caller against the header when a C compiler is around.
#[test]
fn header_compiles_as_c() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let dir = std::env::temp_dir().join(format!("painter-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("caller.c");
    std::fs::write(
        &src,
        r#"#include "painter.h"
int main(void) {
    PainterEngine *engine = NULL;
    PainterSession *session = NULL;
    char *json = NULL;
    if (painter_engine_new(&engine) != PAINTER_STATUS_OK) return 1;
    if (painter_session_start(engine, &session, &json) != PAINTER_STATUS_OK) return 1;
    painter_string_free(json);
    painter_session_free(session);
    painter_engine_free(engine);
    return painter_last_error() == NULL ? 0 : 1;
}
"#,
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    match std::process::Command::new(&cc)
        .args([
            "-fsyntax-only",
            "-std=c99",
            "-Wall",
            "-Werror",
            "-I",
            include,
        ])
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        ),
        Err(e) => eprintln!("skipping: no C compiler ({e})"),
    }
    let _ = std::fs::remove_dir_all(dir);
}
