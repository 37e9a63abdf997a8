//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Thresholds and tolerances are pinned below.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use http_body_util::BodyExt;
use painter_core::assessment::{parse_transcript, run_transcript};
use painter_core::dialogue::DialogueEngine;
use painter_core::persona::{
    map_ab5c, BigFiveProfile, Categorization, CellId, LightSide, Lighting, StyleMap,
};
use painter_core::render::{
    apply_rembrandt, base_stylize, orientation_field, render_portrait, render_strokes_traced,
    sample_portrait, MatteMask, RasterImage,
};
use painter_core::sentiment::{score_text, Lexicon, ScoringConfig};
use painter_core::service::{content_hash, router, AppState, ServiceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

const TRANSCRIPTS: usize = 200;
const TRANSCRIPT_SEED: u64 = 2024;
const DIALOGUE_BUDGET: Duration = Duration::from_secs(10);
const SCALING_PROFILES: usize = 1000;
const SENTENCES: usize = 1000;
const RENDER_SIZE: u32 = 256;
const RENDER_SEED: u64 = 7;
const RENDER_BUDGET: Duration = Duration::from_secs(30);
const LIGHT_STRENGTH: f32 = 0.6;
const LIGHT_MIN_DIFFERENCE: f64 = 0.15;
const LIGHT_TOLERANCE: f64 = 0.02;
const FOCUS_ABSTRACTION: f32 = 0.7;
const FOCUS_MIN_RATIO: f64 = 2.0;
const NOISE_PORTRAITS: u32 = 3;
const STYLE: &str = "E+A+";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dialogue_completion() -> Outcome {
    let engine = DialogueEngine::with_defaults();
    let transcripts = common::synthetic_transcripts(TRANSCRIPTS, TRANSCRIPT_SEED);
    let start = Instant::now();
    let mut closed = 0;
    for lines in &transcripts {
        let utterances = parse_transcript(&lines.join("\n")).map_err(|e| e.to_string())?;
        let state = run_transcript(&engine, &utterances).map_err(|e| e.to_string())?;
        let records = engine.finalize_session(&state).map_err(|e| e.to_string())?;
        if state.is_closed() && records.len() == 5 && state.turn_count <= engine.config().max_turns
        {
            closed += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        closed == TRANSCRIPTS && elapsed < DIALOGUE_BUDGET,
        format!("{closed}/{TRANSCRIPTS} closed with 5 records in {elapsed:.2?} (budget {DIALOGUE_BUDGET:?})"),
    )
}

async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

fn categorization_equivalence() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let lex = common::parse_lexicon(common::LEXICON_TSV);
    rt.block_on(async {
        let app = router(AppState::with_defaults(ServiceConfig::new(dir.path())).map_err(|e| e.to_string())?);
        let mut matched = 0;
        let mut first_mismatch = None;
        for (n, lines) in common::synthetic_transcripts(TRANSCRIPTS, TRANSCRIPT_SEED).iter().enumerate() {
            let (_, created) = call(&app, "POST", "/sessions", None).await;
            let id = created["session"]["id"].as_str().ok_or("no session id")?.to_string();
            let mut closing = Value::Null;
            for line in lines {
                let (status, turn) =
                    call(&app, "POST", &format!("/sessions/{id}/turns"), Some(json!({ "text": line }))).await;
                if status != StatusCode::OK {
                    break;
                }
                if turn["phase"] == "closed" {
                    closing = turn;
                    break;
                }
            }
            let (profile, label) = common::assess(lines, &lex).ok_or("oracle did not close")?;
            let same_profile = common::DIMS
                .iter()
                .enumerate()
                .all(|(i, d)| closing["profile"][d.to_string()].as_f64() == Some(profile[i]));
            if same_profile && closing["cell"] == label.as_str() {
                matched += 1;
            } else if first_mismatch.is_none() {
                first_mismatch = Some(n);
            }
        }
        check(
            matched == TRANSCRIPTS,
            format!("{matched}/{TRANSCRIPTS} (profile, cell) pairs identical to the oracle; first mismatch {first_mismatch:?}"),
        )
    })
}

fn ab5c_coverage() -> Outcome {
    let band = common::DOMINANCE_BAND;
    let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut seen = std::collections::BTreeSet::new();
    for mut i in 0..5usize.pow(5) {
        let mut p = [0.0; 5];
        for slot in &mut p {
            *slot = levels[i % 5];
            i /= 5;
        }
        seen.insert(map_ab5c(&BigFiveProfile::new(p).unwrap(), band).label());
    }
    let reached_cells = CellId::all()
        .iter()
        .filter(|c| seen.contains(&c.label()))
        .count();
    let reached_neutral = seen.contains(Categorization::NEUTRAL_LABEL);

    // Scaling keeps every score in range and the surviving set unchanged.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut tested, mut held) = (0, 0);
    while tested < SCALING_PROFILES {
        let lambda = if rng.random_bool(0.5) { 0.5 } else { 2.0 };
        let p: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        let q = p.map(|s| s * lambda);
        let stable = p
            .iter()
            .zip(&q)
            .all(|(a, b)| b.abs() <= 1.0 && (a.abs() >= band) == (b.abs() >= band));
        if !stable {
            continue;
        }
        tested += 1;
        let a = map_ab5c(&BigFiveProfile::new(p).unwrap(), band);
        let b = map_ab5c(&BigFiveProfile::new(q).unwrap(), band);
        held += usize::from(a == b);
    }
    check(
        reached_cells == 90 && reached_neutral && held == SCALING_PROFILES,
        format!(
            "grid reaches {reached_cells}/90 cells, neutral {reached_neutral}; scaling invariance {held}/{SCALING_PROFILES}"
        ),
    )
}

fn sentiment_oracle() -> Outcome {
    let lex = Lexicon::starter();
    let cfg = ScoringConfig::default();
    let oracle = common::parse_lexicon(common::LEXICON_TSV);
    let mut words: Vec<String> = oracle.keys().cloned().collect();
    words.sort();
    words.extend(["the", "talks", "people", "zzz", "I", "NOT", "Good"].map(String::from));
    let seps = [" ", ", ", "! ", "... ", "\t"];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut agree = 0;
    for _ in 0..SENTENCES {
        let n = rng.random_range(0..14);
        let text: String = (0..n)
            .map(|_| {
                format!(
                    "{}{}",
                    words[rng.random_range(0..words.len())],
                    seps[rng.random_range(0..seps.len())]
                )
            })
            .collect();
        let got = score_text(&text, &lex, &cfg);
        let (value, hits) = common::score(&text, &oracle);
        if got.value == value
            && got.term_hits == hits
            && got.class.as_str() == common::class_of(value, common::NEUTRAL_BAND)
        {
            agree += 1;
        }
    }
    let toy = Lexicon::parse_str("good\t3\nnot\tMOD\tnegator\n").map_err(|e| e.to_string())?;
    let empty = score_text("", &lex, &cfg);
    let empty_ok = empty.value == 0.0 && empty.term_hits == 0 && empty.class.as_str() == "neutral";
    let symmetric = ["I love it", "not bad at all", "very very good, terrible"]
        .iter()
        .all(|t| score_text(t, &lex, &cfg).value == -score_text(t, &lex.negated(), &cfg).value);
    let damped = score_text("not good", &toy, &cfg).value == -0.3
        && score_text("good", &toy, &cfg).value == 0.6;
    check(
        agree == SENTENCES && empty_ok && symmetric && damped,
        format!("{agree}/{SENTENCES} sentences exact; empty {empty_ok}, sign symmetry {symmetric}, negation damping {damped}"),
    )
}

fn style() -> painter_core::persona::StyleSpec {
    StyleMap::builtin()
        .style_for(&STYLE.parse().unwrap())
        .clone()
}

fn renderer_determinism() -> Outcome {
    let img = sample_portrait(RENDER_SIZE, 0);
    let s = style();
    let start = Instant::now();
    let a = render_portrait(&img, &s, RENDER_SEED, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let b = render_portrait(&img, &s, RENDER_SEED, None).map_err(|e| e.to_string())?;
    let (pa, pb) = (
        a.final_image().encode_png().map_err(|e| e.to_string())?,
        b.final_image().encode_png().map_err(|e| e.to_string())?,
    );
    let dims = a.final_image().dimensions() == (RENDER_SIZE, RENDER_SIZE);
    check(
        pa == pb && dims && elapsed < RENDER_BUDGET,
        format!(
            "identical PNG {} ({}), {RENDER_SIZE}x{RENDER_SIZE}: {dims}, one run {elapsed:.2?} (budget {RENDER_BUDGET:?})",
            pa == pb,
            &content_hash(&pa)[..12]
        ),
    )
}

fn lighting_asymmetry() -> Outcome {
    let width = 256;
    let gray = RasterImage::filled(width, 64, [128; 3]);
    let lit = apply_rembrandt(
        &gray,
        &Lighting {
            side: LightSide::Left,
            strength: LIGHT_STRENGTH,
        },
    );
    let luma = |p: [u8; 3]| {
        (0.2126 * f64::from(p[0]) + 0.7152 * f64::from(p[1]) + 0.0722 * f64::from(p[2])) / 255.0
    };
    let half = width / 2;
    let mean = |xs: std::ops::Range<u32>| {
        let n = f64::from(xs.len() as u32 * 64);
        xs.flat_map(|x| (0..64).map(move |y| (x, y)))
            .map(|(x, y)| luma(lit.get(x, y)))
            .sum::<f64>()
            / n
    };
    let got = mean(0..half) - mean(width - half..width);
    let oracle = common::lighting_half_difference(
        width as usize,
        128.0 / 255.0,
        f64::from(LIGHT_STRENGTH),
        0.25,
    );
    check(
        got >= LIGHT_MIN_DIFFERENCE && (got - oracle).abs() <= LIGHT_TOLERANCE,
        format!("difference {got:.4} (min {LIGHT_MIN_DIFFERENCE}), oracle {oracle:.4} (tolerance {LIGHT_TOLERANCE})"),
    )
}

fn palette_and_focus() -> Outcome {
    let size = RENDER_SIZE;
    let mut s = style();
    s.abstraction = FOCUS_ABSTRACTION;
    let c = (size as f32 - 1.0) / 2.0;
    let r = size as f32 * 0.3;
    let weights = (0..size * size)
        .map(|i| {
            let (x, y) = ((i % size) as f32, (i / size) as f32);
            let d = ((x - c).powi(2) + (y - c).powi(2)).sqrt();
            (r + 4.0 - d).clamp(0.0, 8.0) / 8.0
        })
        .collect();
    let matte = MatteMask::new(size, size, weights).map_err(|e| e.to_string())?;
    let base = base_stylize(&sample_portrait(size, 0), &s, RENDER_SEED);
    let field = orientation_field(&base, 3.0).map_err(|e| e.to_string())?;
    let out =
        render_strokes_traced(&base, &matte, &field, &s, RENDER_SEED).map_err(|e| e.to_string())?;
    let in_palette = out
        .strokes
        .iter()
        .filter(|st| s.palette.contains(&st.color))
        .count();
    let (mut fg, mut bg) = (0usize, 0usize);
    for st in &out.strokes {
        let m = matte.get(st.x.floor() as u32, st.y.floor() as u32);
        if m > 0.7 {
            fg += 1;
        } else if m < 0.3 {
            bg += 1;
        }
    }
    let fg_area = matte.weights().iter().filter(|&&m| m > 0.7).count() as f64;
    let bg_area = matte.weights().iter().filter(|&&m| m < 0.3).count() as f64;
    let ratio = (fg as f64 / fg_area) / (bg as f64 / bg_area).max(f64::MIN_POSITIVE);
    check(
        in_palette == out.strokes.len() && ratio >= FOCUS_MIN_RATIO,
        format!(
            "{in_palette}/{} stroke colors in palette; foreground/background seed density {ratio:.2} (min {FOCUS_MIN_RATIO})",
            out.strokes.len()
        ),
    )
}

fn noise_reduction() -> Outcome {
    let s = style();
    let mut parts = Vec::new();
    let mut all = true;
    for variant in 0..NOISE_PORTRAITS {
        let r = render_portrait(
            &sample_portrait(RENDER_SIZE, variant),
            &s,
            RENDER_SEED,
            None,
        )
        .map_err(|e| e.to_string())?;
        let n = RENDER_SIZE as usize;
        let fin = common::local_variance(n, n, r.final_image().pixels());
        let base = common::local_variance(n, n, r.base.pixels());
        all &= fin < base;
        parts.push(format!("#{variant} {fin:.5} < {base:.5}"));
    }
    check(
        all,
        format!("final vs base local variance: {}", parts.join(", ")),
    )
}

fn end_to_end_cli() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let bin = env!("CARGO_BIN_EXE_painter");
    let run = |args: &[&str]| -> Result<Value, String> {
        let out = Command::new(bin)
            .args(args)
            .env("RUST_LOG", "warn")
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
    };
    let transcript = data.join("sample_transcript.txt");
    let a = run(&["assess", "--transcript", transcript.to_str().unwrap()])?;
    let cell = a["cell"].as_str().ok_or("no cell")?.to_string();
    let lex = common::parse_lexicon(common::LEXICON_TSV);
    let (_, oracle) =
        common::assess(&common::sample_utterances(), &lex).ok_or("oracle did not close")?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let portrait = data.join("sample_portrait.png");
    let mut hashes = Vec::new();
    for name in ["first.png", "second.png"] {
        let out = dir.path().join(name);
        let summary = run(&[
            "paint",
            "--image",
            portrait.to_str().unwrap(),
            "--cell",
            &cell,
            "--seed",
            &RENDER_SEED.to_string(),
            "--out",
            out.to_str().unwrap(),
        ])?;
        let png = std::fs::read(&out).map_err(|e| e.to_string())?;
        let decoded = RasterImage::decode(&png).map_err(|e| e.to_string())?;
        if decoded.dimensions() != (RENDER_SIZE, RENDER_SIZE)
            || summary["sha256"] != content_hash(&png)
        {
            return Err(format!("{name}: unexpected output {summary}"));
        }
        hashes.push(content_hash(&png));
    }
    check(
        cell == oracle && hashes[0] == hashes[1],
        format!(
            "cell {cell} (oracle {oracle}); rerun hash {} == {}",
            &hashes[0][..12],
            &hashes[1][..12]
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("dialogue completion", dialogue_completion),
        (
            "categorization oracle equivalence",
            categorization_equivalence,
        ),
        ("AB5C coverage and scaling", ab5c_coverage),
        ("sentiment oracle", sentiment_oracle),
        ("renderer determinism", renderer_determinism),
        ("lighting asymmetry", lighting_asymmetry),
        ("palette closure and focus", palette_and_focus),
        ("noise reduction", noise_reduction),
        ("end-to-end CLI", end_to_end_cli),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
