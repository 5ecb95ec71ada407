use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qebc::baseline::{compare_methods, default_seeds, format_table, write_csv, DEFAULT_SEEDS};
use qebc::container::{compress, decompress, verify, CompressOptions, Mode};
use qebc::fixed::EncodingId;
use qebc::mesh::io::{load_polygon_mesh, write_mesh, Format};
use qebc::preprocess::split_large_polygons;
use qebc::{Error, PolyMesh};

#[derive(Parser)]
#[command(name = "qebc", version, about = "Connectivity compression for quad and quad/triangle meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Entropy,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    A,
    B,
    C,
    D,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Obj,
    Off,
}

#[derive(clap::Args)]
struct CodecArgs {
    #[arg(long, value_enum, default_value = "fixed")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "auto")]
    encoding: EncodingArg,
    /// Context depth of the entropy coder
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(0..=4))]
    memory: u8,
    /// Store vertex coordinates in first-visit order
    #[arg(long)]
    geometry: bool,
    /// Store the permutation back to the input vertex order
    #[arg(long)]
    keep_order: bool,
    /// Store valence-two split flags without range coding
    #[arg(long)]
    raw_split_flags: bool,
}

impl CodecArgs {
    fn options(&self) -> CompressOptions {
        CompressOptions {
            mode: match self.mode {
                ModeArg::Fixed => Mode::Fixed,
                ModeArg::Entropy => Mode::Entropy,
            },
            encoding: match self.encoding {
                EncodingArg::A => Some(EncodingId::A),
                EncodingArg::B => Some(EncodingId::B),
                EncodingArg::C => Some(EncodingId::C),
                EncodingArg::D => Some(EncodingId::D),
                EncodingArg::Auto => None,
            },
            memory: usize::from(self.memory),
            geometry: self.geometry,
            keep_order: self.keep_order,
            code_split_flags: !self.raw_split_flags,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compress an OBJ or OFF mesh
    Compress {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Decompress a container to OBJ or OFF
    Decompress {
        input: PathBuf,
        output: PathBuf,
        /// Output format; defaults to the output extension, then OBJ
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Report fixed-code and entropy costs against the random-split baseline
    Analyze {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEEDS)]
        seeds: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Round-trip a mesh and check the decoded connectivity
    Verify {
        input: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn load(path: &Path) -> Result<PolyMesh, Error> {
    let format = Format::from_path(path)
        .ok_or_else(|| Error::Precondition(format!("{}: expected a .obj or .off file", path.display())))?;
    load_polygon_mesh(&read(path)?, format)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Compress { input, output, codec } => {
            let mesh = load(&input)?;
            let c = compress(&mesh, &codec.options())?;
            std::fs::write(&output, &c.bytes)?;
            let v = mesh.vertex_count().max(1) as f64;
            println!(
                "{} vertices, {} faces: {} bits ({:.3} bits/vertex), payload {} bits ({:.3} bits/vertex), {:?} mode",
                mesh.vertex_count(),
                mesh.face_count(),
                c.total_bits(),
                c.total_bits() as f64 / v,
                c.payload_bits(),
                c.payload_bits() as f64 / v,
                c.mode()
            );
        }
        Command::Decompress { input, output, format } => {
            let mesh = decompress(&read(&input)?)?;
            let format = match format {
                Some(FormatArg::Obj) => Format::Obj,
                Some(FormatArg::Off) => Format::Off,
                None => Format::from_path(&output).unwrap_or(Format::Obj),
            };
            std::fs::write(&output, write_mesh(mesh.as_poly(), format))?;
            println!("{} vertices, {} faces", mesh.vertex_count(), mesh.face_count());
        }
        Command::Analyze { input, seeds, csv } => {
            let mesh = split_large_polygons(&load(&input)?)?;
            let name = input.file_stem().map_or("mesh".into(), |s| s.to_string_lossy().into_owned());
            let row = compare_methods(&name, &mesh, &default_seeds(seeds.max(1)))?;
            print!("{}", format_table(std::slice::from_ref(&row)));
            if let Some(path) = csv {
                std::fs::write(path, write_csv(&[row])?)?;
            }
        }
        Command::Verify { input, codec } => {
            let r = verify(&load(&input)?, &codec.options())?;
            println!("OK, {} faces, {} bits ({:.3} bits/vertex)", r.faces, r.bits, r.bits_per_vertex());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
