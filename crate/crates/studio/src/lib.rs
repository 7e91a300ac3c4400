//! The `gad-studio` command line.

mod args;
mod chat;

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context as _};
use gad_access::{spawn_dataset_server, AnimationCache, AnimationSpec, Catalog, DatasetClient, ServerHandle, SyntheticDataset};
use gad_core::gad::{parse_gad, read_gad, validate_gad, Severity};
use gad_render::{render_animation, ImageFormat, OutputOptions, ReferenceBackend, RenderSettings};
use gad_scripting::{no_progress, Generated, LlmClient, MockLlm, OpenAiClient, Pipeline};

pub use args::*;
pub use chat::chat;

/// Runs one command and returns the process exit code.
pub async fn run(cli: Cli) -> anyhow::Result<i32> {
    let mut out = std::io::stdout();
    match cli.command {
        Command::Chat(a) => {
            chat(&a, &mut std::io::BufReader::new(std::io::stdin()), &mut out).await?;
            Ok(0)
        }
        Command::Generate(a) => {
            let g = generate(&a).await?;
            println!("{}\t{}\t{} frames{}", g.id, g.frame_dir.display(), g.frames.len(), if g.cache_hit { "\t(cached)" } else { "" });
            Ok(0)
        }
        Command::Render(a) => {
            let n = render(&a)?;
            println!("{n} frames written to {}", a.out.display());
            Ok(0)
        }
        Command::Validate(a) => validate(&a.gad_root, &mut out),
        Command::Serve(a) => serve(a).await.map(|_| 0),
        Command::DatasetServer(a) => {
            let h = spawn_dataset_server(mini_ocean_catalog(), a.bind).await?;
            println!("dataset server listening on {}", h.url());
            tokio::select! {
                r = h.wait() => r?,
                _ = tokio::signal::ctrl_c() => {}
            }
            Ok(0)
        }
    }
}

pub fn mini_ocean_catalog() -> Catalog {
    Catalog::new().with(SyntheticDataset::mini_ocean())
}

pub fn render_settings(opts: &RenderOpts) -> RenderSettings {
    RenderSettings::default().with_size(opts.size.0, opts.size.1)
}

pub fn image_format(opts: &RenderOpts) -> ImageFormat {
    match opts.format {
        FrameFormat::Png => ImageFormat::Png,
        FrameFormat::Ppm => ImageFormat::Ppm,
    }
}

/// The dataset server to talk to: `url` when given, otherwise an
/// in-process mini-ocean server that lives as long as the returned handle.
pub async fn dataset_endpoint(url: Option<&str>) -> anyhow::Result<(String, Option<ServerHandle>)> {
    match url {
        Some(u) => Ok((u.to_string(), None)),
        None => {
            let h = spawn_dataset_server(mini_ocean_catalog(), "127.0.0.1:0".parse().expect("literal address")).await?;
            Ok((h.url(), Some(h)))
        }
    }
}

pub fn llm_client(a: &LlmArgs) -> anyhow::Result<Arc<dyn LlmClient>> {
    Ok(match a.llm {
        LlmKind::Mock => Arc::new(MockLlm::new()),
        LlmKind::Endpoint => {
            let url = a.llm_url.as_deref().context("--llm-url is required with --llm endpoint")?;
            let client = match &a.llm_key_env {
                Some(var) => OpenAiClient::from_env(url, a.llm_model.clone(), var)?,
                None => OpenAiClient::new(url, a.llm_model.clone(), None)?,
            };
            Arc::new(client)
        }
    })
}

pub fn pipeline(server_url: &str, cache: &Path, out: &Path, render: &RenderOpts) -> anyhow::Result<Pipeline> {
    let client = DatasetClient::new(server_url)?;
    let cache = AnimationCache::open(cache)?;
    let mut p = Pipeline::new(client, Arc::new(cache), out).with_settings(render_settings(render));
    p.format = image_format(render);
    Ok(p)
}

/// `generate`: frames of the spec end up in `<out>/<id>/`.
pub async fn generate(a: &GenerateArgs) -> anyhow::Result<Generated> {
    let spec = AnimationSpec::new(a.region, a.time, a.quality, a.field.clone(), a.streamlines).with_dataset(a.dataset.clone());
    spec.validate()?;
    let (url, local) = dataset_endpoint(a.server.as_deref()).await?;
    let cache = a.cache.clone().unwrap_or_else(|| a.out.join("cache"));
    let p = pipeline(&url, &cache, &a.out, &a.render)?;
    let g = p.generate(&spec, no_progress()).await;
    if let Some(h) = local {
        h.shutdown().await?;
    }
    Ok(g?)
}

/// `render`: returns the number of frames written.
pub fn render(a: &RenderArgs) -> anyhow::Result<usize> {
    let doc = parse_gad(&a.gad_root)?;
    let out = OutputOptions::new(a.out.clone(), image_format(&a.render));
    let r = render_animation(&doc, &a.gad_root, &render_settings(&a.render), &ReferenceBackend, &out, &mut |_, _| {})?;
    tracing::info!(peak_block_bytes = r.stats.peak_block_bytes, "render finished");
    Ok(r.frames.len())
}

/// `validate`: prints every diagnostic; exit code 1 when any is an error.
pub fn validate(root: &Path, out: &mut impl std::io::Write) -> anyhow::Result<i32> {
    let doc = match read_gad(root) {
        Ok(d) => d,
        Err(e) => {
            writeln!(out, "error: {e}")?;
            return Ok(1);
        }
    };
    let diags = validate_gad(&doc);
    for d in &diags {
        let sev = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        writeln!(out, "{sev} [{:?}] {}: {}", d.code, d.path, d.message)?;
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Ok(1);
    }
    let frames = doc.frame_span().map_or(0, |(a, b)| b - a + 1);
    writeln!(
        out,
        "valid: {} keyframes, {} data entries, {frames} frames",
        doc.keyframes.len(),
        doc.data_list.len()
    )?;
    Ok(0)
}

async fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let (url, local) = dataset_endpoint(a.server.as_deref()).await?;
    let mut config = gad_service::ServiceConfig::new(url, a.cache.clone(), a.out.clone());
    config.bind = a.bind;
    config.llm = llm_client(&a.llm)?;
    config.workers = a.workers;
    config.render = render_settings(&a.render);
    config.ui_dir = a.ui_dir.clone();
    if image_format(&a.render) != ImageFormat::Png {
        bail!("the service serves PNG frames only");
    }
    let handle = gad_service::serve(config).await?;
    println!("service listening on {}", handle.url());
    let jobs = handle
        .run_until(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    tracing::info!(jobs = jobs.len(), "service stopped");
    if let Some(h) = local {
        h.shutdown().await?;
    }
    Ok(())
}
