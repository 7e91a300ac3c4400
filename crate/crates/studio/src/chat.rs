use std::io::{BufRead, Write};

use anyhow::Context as _;
use gad_access::AnimationId;
use gad_scripting::{build_context, menu, no_progress, presets, run_loop, ChatSession, Critique, MenuAction};

use crate::args::ChatArgs;
use crate::{dataset_endpoint, llm_client, pipeline};

fn read_line(input: &mut dyn BufRead) -> std::io::Result<Option<String>> {
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    Ok(Some(line.trim().to_string()))
}

fn print_menu(out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "0) describe a phenomenon")?;
    for p in presets() {
        writeln!(out, "{}) {}: {}", p.choice, p.name, p.phenomenon)?;
    }
    writeln!(out, "q) quit")?;
    write!(out, "> ")?;
    out.flush()
}

fn describe(c: &Critique) -> String {
    let d = &c.suggested_deltas;
    let mut parts = Vec::new();
    if let Some(q) = d.quality {
        parts.push(format!("quality {q}"));
    }
    if let Some(s) = d.streamlines {
        parts.push(format!("streamlines {s}"));
    }
    if let Some(f) = &d.field {
        parts.push(format!("field {f}"));
    }
    if let Some(t) = d.time {
        parts.push(format!("time {t:?}"));
    }
    if let Some(b) = d.region {
        parts.push(format!("box {b:?}"));
    }
    parts.join(", ")
}

/// Menu loop over `input`. Returns the animations produced, in order.
pub async fn chat(a: &ChatArgs, input: &mut (dyn BufRead + Send), out: &mut (dyn Write + Send)) -> anyhow::Result<Vec<AnimationId>> {
    let (url, local) = dataset_endpoint(a.server.as_deref()).await?;
    let p = pipeline(&url, &a.cache, &a.out, &a.render)?;
    let llm = llm_client(&a.llm)?;
    let descriptor = p
        .client
        .dataset(&a.dataset)
        .await
        .with_context(|| format!("loading dataset {}", a.dataset))?;
    let examples: Vec<_> = presets().iter().map(|p| p.example()).collect();
    let mut session = ChatSession::new("cli", build_context(&descriptor, &examples));
    let mut produced = Vec::new();

    loop {
        print_menu(out)?;
        let Some(choice) = read_line(input)? else { break };
        if choice.eq_ignore_ascii_case("q") {
            break;
        }
        let Ok(n) = choice.parse::<u32>() else {
            writeln!(out, "choose 0-4 or q")?;
            continue;
        };
        let text = if n == 0 {
            write!(out, "describe> ")?;
            out.flush()?;
            read_line(input)?
        } else {
            None
        };
        let action = match menu(n, text.as_deref(), Some(&p.cache)) {
            Ok(a) => a,
            Err(e) => {
                writeln!(out, "{e}")?;
                continue;
            }
        };
        match action {
            MenuAction::Preset { preset, cached } => {
                writeln!(out, "{}{}", preset.name, if cached { " (cached)" } else { "" })?;
                let g = p.generate(&preset.spec.clone().with_dataset(a.dataset.clone()), no_progress()).await?;
                writeln!(out, "{} frames in {}", g.frames.len(), g.frame_dir.display())?;
                produced.push(g.id);
            }
            MenuAction::Plan(text) => {
                let mut accept = |c: &Critique| {
                    if c.suggested_deltas.is_empty() {
                        let _ = writeln!(out, "critique: {} (no changes suggested)", c.commentary);
                        return false;
                    }
                    let _ = write!(out, "critique: {}\nsuggested: {}\napply? [y/N] ", c.commentary, describe(c));
                    let _ = out.flush();
                    matches!(read_line(input), Ok(Some(s)) if s.eq_ignore_ascii_case("y") || s.eq_ignore_ascii_case("yes"))
                };
                let result = run_loop(&mut session, &text, llm.as_ref(), &p, &mut accept).await;
                match result {
                    Ok(done) => {
                        for (id, dir) in done {
                            writeln!(out, "{id} -> {}", dir.display())?;
                            produced.push(id);
                        }
                    }
                    Err(e) => writeln!(out, "error: {e}")?,
                }
            }
        }
    }
    if let Some(h) = local {
        h.shutdown().await?;
    }
    Ok(produced)
}
