use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use headcast::config::PipelineConfig;
use headcast::pipeline::{self, Database, InputSet, OutputWriter};
use headcast::render::RenderedRegionDb;
use headcast::{mesh, par, synth};

#[derive(Parser)]
#[command(
    name = "headcast",
    version,
    about = "Reconstructs a textured, fixed-topology 3D head from face images and 68-point landmarks"
)]
struct Cli {
    /// Worker thread count. Changes wall time only; outputs are identical.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a deterministic synthetic head database.
    GenDb {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        /// Side length of the generated textures.
        #[arg(long, default_value_t = 2048)]
        texture_size: usize,
    },
    /// Render every database head and cut the comparison regions.
    RenderDb {
        #[arg(long)]
        db: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Render/box configuration; defaults to the database's own.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Select, blend and morph a head for the given input frames.
    Fit {
        #[arg(long)]
        db: PathBuf,
        /// Directory with frame PNGs and landmark JSONs side by side.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Closest matches blended per region (1 or 3).
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Build the UV texture from picked frames.
    Texture {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        landmarks: PathBuf,
        #[arg(long)]
        db: PathBuf,
        /// Output texture PNG path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render synthetic input frames + landmarks for a database head.
    GenInput {
        #[arg(long)]
        db: PathBuf,
        /// Database model index.
        #[arg(long)]
        model: usize,
        #[arg(long)]
        out: PathBuf,
        /// Yaw angles to render, degrees.
        #[arg(long, value_delimiter = ',', default_value = "-30,0,30", allow_hyphen_values = true)]
        yaws: Vec<f64>,
    },
    /// Check database consistency and print the per-check report.
    Validate {
        #[arg(long)]
        db: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let threads = cli.threads;
    par::with_threads(threads, || dispatch(cli.cmd))
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::GenDb {
            seed,
            count,
            out,
            texture_size,
        } => {
            synth::gen_synthetic_db(seed, count, &out, texture_size)
                .with_context(|| format!("generating database in {}", out.display()))?;
            println!("wrote {count} heads to {}", out.display());
            Ok(())
        }
        Cmd::RenderDb { db, out, config } => {
            let mut database = Database::load(&db).context("loading database")?;
            if let Some(path) = config {
                database.config = headcast::config::DbConfig::load_toml(&path)
                    .context("loading render config")?;
            }
            let report = database.validate();
            if !report.passed() {
                bail!("database failed validation:\n{report}");
            }
            let rendered = database.render_regions().context("rendering regions")?;
            rendered.save_dir(&out).context("writing region renders")?;
            println!(
                "rendered {} models x 4 regions into {}",
                rendered.len(),
                out.display()
            );
            Ok(())
        }
        Cmd::Fit {
            db,
            input,
            out,
            top_n,
            config,
        } => {
            let database = Database::load(&db).context("loading database")?;
            let mut cfg = load_pipeline_config(config)?;
            if let Some(n) = top_n {
                cfg.top_n = n;
            }
            let rendered = load_or_render(&database, &db)?;
            let inputs = InputSet::load(&input, &input).context("loading input frames")?;
            let outcome = pipeline::fit(&database, &rendered, &cfg, &inputs)?;

            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            let mut writer = OutputWriter::new();
            writer.write(out.join("mesh.obj"), |p| {
                mesh::save_head_mesh(&outcome.mesh, p)
            })?;
            writer.write(out.join("report.json"), |p| {
                write_json(p, &outcome.report)
            })?;

            for (region, r) in &outcome.report.regions {
                println!(
                    "{region:>6}: top {} weights {:?}",
                    r.top,
                    r.support
                        .iter()
                        .zip(r.weights.iter().filter(|w| **w > 0.0))
                        .map(|(id, w)| format!("{id}:{w:.3}"))
                        .collect::<Vec<_>>()
                );
            }
            println!("mesh + report written to {}", out.display());
            Ok(())
        }
        Cmd::Texture {
            frames,
            landmarks,
            db,
            out,
            config,
        } => {
            let database = Database::load(&db).context("loading database")?;
            let cfg = load_pipeline_config(config)?;
            let inputs = InputSet::load(&frames, &landmarks).context("loading input frames")?;
            let outcome = pipeline::texture(&database, &cfg, &inputs)?;

            let report_path = out.with_extension("report.json");
            let mut writer = OutputWriter::new();
            writer.write(&out, |p| outcome.atlas.image().save_png(p))?;
            writer.write(&report_path, |p| write_json(p, &outcome.report))?;
            println!(
                "texture written to {} (frames: {} / {} / {})",
                out.display(),
                outcome.report.left_frame.as_deref().unwrap_or("-"),
                outcome.report.center_frame,
                outcome.report.right_frame.as_deref().unwrap_or("-"),
            );
            Ok(())
        }
        Cmd::GenInput { db, model, out, yaws } => {
            let database = Database::load(&db).context("loading database")?;
            if model >= database.len() {
                bail!("model {model} out of range, database has {}", database.len());
            }
            let probes = synth::probe_frames(
                &database.meshes[model],
                &database.lmap,
                &database.config.render,
                &yaws,
            )?;
            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            for probe in &probes {
                probe.image.save_png(out.join(format!("{}.png", probe.id)))?;
                probe
                    .landmarks
                    .save_json(out.join(format!("{}.json", probe.id)))?;
            }
            println!(
                "wrote {} probe frames of {} to {}",
                probes.len(),
                database.model_ids[model],
                out.display()
            );
            Ok(())
        }
        Cmd::Validate { db } => {
            let database = Database::load(&db).context("loading database")?;
            let report = database.validate();
            print!("{report}");
            if report.passed() {
                println!("database ok ({} heads)", database.len());
                Ok(())
            } else {
                bail!("database failed validation");
            }
        }
    }
}

fn load_pipeline_config(path: Option<PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load_toml(&p)
            .with_context(|| format!("loading pipeline config {}", p.display())),
        None => Ok(PipelineConfig::default()),
    }
}

/// Cached region renders live in `<db>/renders`; anything else is rendered
/// on the fly.
fn load_or_render(database: &Database, db_dir: &Path) -> Result<RenderedRegionDb> {
    let cache = db_dir.join("renders");
    if cache.is_dir() {
        let rendered = RenderedRegionDb::load_dir(&cache).context("loading cached renders")?;
        if rendered.model_ids == database.model_ids {
            return Ok(rendered);
        }
        eprintln!("note: cached renders in {} do not match the database, re-rendering", cache.display());
    }
    database.render_regions().context("rendering regions")
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> headcast::Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| headcast::Error::InvalidConfig(format!("serialize report: {e}")))?;
    std::fs::write(path, text).map_err(|e| headcast::Error::io(path, e))
}
