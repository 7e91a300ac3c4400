use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gad_access::{TimeRange, DEFAULT_DATASET};
use gad_core::VoxelBox;

#[derive(Debug, Parser)]
#[command(name = "gad-studio", version, about = "Describe, generate and render ocean animations")]
pub struct Cli {
    /// Log more (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn log_filter(&self) -> &'static str {
        match self.verbose {
            0 => "warn",
            1 => "info",
            _ => "debug",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Menu-driven session: pick a preset or describe a phenomenon.
    Chat(ChatArgs),
    /// Materialize and render one animation spec.
    Generate(GenerateArgs),
    /// Render an existing GAD bundle.
    Render(RenderArgs),
    /// Check a GAD bundle and list every problem found.
    Validate(ValidateArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Serve the synthetic mini-ocean dataset.
    DatasetServer(DatasetServerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LlmKind {
    /// Offline scripted planner.
    Mock,
    /// OpenAI-compatible chat completions endpoint.
    Endpoint,
}

#[derive(Debug, Clone, Args)]
pub struct LlmArgs {
    #[arg(long, value_enum, default_value = "mock")]
    pub llm: LlmKind,
    /// Base URL of the endpoint, e.g. https://api.example.com/v1.
    #[arg(long, required_if_eq("llm", "endpoint"))]
    pub llm_url: Option<String>,
    #[arg(long, default_value = "gpt-4o")]
    pub llm_model: String,
    /// Name of the environment variable holding the API key.
    #[arg(long)]
    pub llm_key_env: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderOpts {
    /// Frame size as WxH.
    #[arg(long, value_parser = parse_size, default_value = "256x256")]
    pub size: (u32, u32),
    #[arg(long, value_enum, default_value = "png")]
    pub format: FrameFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrameFormat {
    Png,
    Ppm,
}

#[derive(Debug, Clone, Args)]
pub struct ChatArgs {
    #[arg(long, default_value = DEFAULT_DATASET)]
    pub dataset: String,
    /// Dataset server URL; an in-process mini-ocean server is started when omitted.
    #[arg(long)]
    pub server: Option<String>,
    #[command(flatten)]
    pub llm: LlmArgs,
    #[arg(long, default_value = "gad-cache")]
    pub cache: PathBuf,
    /// Frames go to `<out>/<animation id>/`.
    #[arg(long, default_value = "frames")]
    pub out: PathBuf,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Region as x1,y1,z1,x2,y2,z2 (upper bounds exclusive).
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub region: VoxelBox,
    /// Timesteps as start,end,step (end inclusive).
    #[arg(long, value_parser = parse_time)]
    pub time: TimeRange,
    /// 0 is full resolution; each step down halves the voxel count.
    #[arg(long, allow_negative_numbers = true)]
    pub quality: i32,
    #[arg(long)]
    pub field: String,
    #[arg(long)]
    pub streamlines: bool,
    #[arg(long, default_value = DEFAULT_DATASET)]
    pub dataset: String,
    /// Frames go to `<out>/<animation id>/`.
    #[arg(long)]
    pub out: PathBuf,
    /// Dataset server URL; an in-process mini-ocean server is started when omitted.
    #[arg(long)]
    pub server: Option<String>,
    /// Animation cache; defaults to `<out>/cache`.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    pub gad_root: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub gad_root: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
    /// Dataset server URL; an in-process mini-ocean server is started when omitted.
    #[arg(long)]
    pub server: Option<String>,
    #[arg(long, default_value = "gad-cache")]
    pub cache: PathBuf,
    #[arg(long, default_value = "frames")]
    pub out: PathBuf,
    #[arg(long, default_value_t = gad_service::DEFAULT_WORKERS)]
    pub workers: usize,
    /// Directory of static files for the browser UI.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    #[command(flatten)]
    pub llm: LlmArgs,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetServerArgs {
    #[arg(long, default_value = "127.0.0.1:8081")]
    pub bind: SocketAddr,
}

fn numbers<T: std::str::FromStr>(s: &str, n: usize, what: &str) -> Result<Vec<T>, String> {
    let v: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| format!("{p:?} is not a valid {what} component")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

pub fn parse_box(s: &str) -> Result<VoxelBox, String> {
    let v = numbers::<u32>(s, 6, "box")?;
    Ok(VoxelBox::new([v[0], v[1], v[2]], [v[3], v[4], v[5]]))
}

pub fn parse_time(s: &str) -> Result<TimeRange, String> {
    let v = numbers::<u32>(s, 3, "time")?;
    Ok(TimeRange::new(v[0], v[1], v[2]))
}

pub fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("{s:?} is not WxH"))?;
    let p = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("{s:?} is not WxH"));
    Ok((p(w)?, p(h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_box("0,0,0,128,64,32").unwrap(), VoxelBox::new([0, 0, 0], [128, 64, 32]));
        assert!(parse_box("0,0,0,1,1").is_err());
        assert!(parse_box("0,0,-1,1,1,1").is_err());
        assert_eq!(parse_time("0,89,1").unwrap(), TimeRange::new(0, 89, 1));
        assert_eq!(parse_size("320x200").unwrap(), (320, 200));
        assert!(parse_size("320").is_err());
    }

    #[test]
    fn negative_quality_and_key_by_variable() {
        let cli = Cli::try_parse_from([
            "gad-studio", "generate", "--box", "0,0,0,8,8,8", "--time", "0,3,1", "--quality", "-4", "--field",
            "salinity", "--out", "x",
        ])
        .unwrap();
        match cli.command {
            Command::Generate(g) => assert_eq!(g.quality, -4),
            other => panic!("{other:?}"),
        }
        let cli = Cli::try_parse_from([
            "gad-studio", "chat", "--llm", "endpoint", "--llm-url", "http://x/v1", "--llm-key-env", "MY_KEY",
        ])
        .unwrap();
        match cli.command {
            Command::Chat(c) => assert_eq!(c.llm.llm_key_env.as_deref(), Some("MY_KEY")),
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["gad-studio", "chat", "--llm", "endpoint"]).is_err());
        assert!(Cli::try_parse_from(["gad-studio", "chat", "--llm-key", "sk-123"]).is_err());
    }
}
