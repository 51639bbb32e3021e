//! `medkit`: command-line front end for the medkit toolkit.
//!
//! Vectors are comma-separated (`--spacing 0.5,0.5,2`) and ordered x, y, z[, t].
//! File formats follow the extension. Exit status is 0 on success, 1 on a
//! processing error and 2 on a usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use medkit_core::io::{self, MeshFormat, PixelType};
use medkit_core::mesh::{box_mesh, cylinder_mesh, ellipsoid_mesh, plane_mesh, sphere_mesh, DEFAULT_RESOLUTION};
use medkit_core::metrics::Metric;
use medkit_core::optim::OptimOptions;
use medkit_core::processing::{
    blur, crop, gradient, resample, reslice, Blur, GradientOptions, GridSpec, ResampleOptions, ResliceOptions,
    SliceFrame,
};
use medkit_core::registration::{register, Optimizer, RegistrationProblem, RegistrationResult, TransformModel};
use medkit_core::transforms::{embed_matrix4, ffd_initialize, FfdBounds};
use medkit_core::{Image, Interpolation};
use serde_json::json;

#[derive(Parser)]
#[command(name = "medkit", version, about = "Medical image and mesh processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print image geometry and value range (or mesh counts) as JSON.
    Info { input: PathBuf },
    /// Convert between image formats, or between mesh formats.
    Convert {
        input: PathBuf,
        output: PathBuf,
        /// Stored element type: uint8, int16, float32, float64, ...
        #[arg(long)]
        element_type: Option<PixelType>,
    },
    /// Resample onto a new grid.
    Resample {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        spacing: Option<Vec<f64>>,
        /// Spacing then size, around the input centre.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        spacing_and_size: Option<Vec<f64>>,
        /// Spacing, size, then world centre.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        spacing_size_centre: Option<Vec<f64>>,
        /// Use the grid of this image.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value = "linear")]
        interpolation: Interpolation,
        /// Gaussian pre-filter half-widths in voxels (needs --blur-sigma).
        #[arg(long, value_delimiter = ',', requires = "blur_sigma")]
        blur_neigh: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', requires = "blur_neigh")]
        blur_sigma: Option<Vec<f64>>,
    },
    /// Keep the voxels inside world bounds `xmin,xmax,ymin,ymax[,zmin,zmax]`.
    Crop {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        bounds: Vec<f64>,
    },
    /// Sample a 3D volume on a plane.
    Reslice {
        input: PathBuf,
        output: PathBuf,
        /// Plane normal; axial when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        normal: Option<Vec<f64>>,
        /// Point on the plane; the volume centre when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
        /// In-plane spacing `su,sv`.
        #[arg(long, value_delimiter = ',')]
        spacing: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        thickness: usize,
        #[arg(long, default_value = "linear")]
        interpolation: Interpolation,
        /// Write the 2D slice instead of the one-voxel-thick volume.
        #[arg(long)]
        flat: bool,
    },
    /// Gaussian derivatives, one output per axis.
    Gradient {
        input: PathBuf,
        #[arg(required = true)]
        outputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[arg(long, value_delimiter = ',')]
        sigma: Option<Vec<f64>>,
    },
    /// Gaussian smoothing on the image grid.
    Blur {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        neigh: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<f64>,
    },
    /// Rigid registration; writes an ITK matrix file.
    RegisterRigid {
        #[command(flatten)]
        common: RegisterArgs,
        /// ITK matrix output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// B-spline free-form registration; writes the parameters as JSON.
    RegisterFfd {
        #[command(flatten)]
        common: RegisterArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        grid_spacing: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Parameter output (JSON).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a mesh primitive.
    MeshSource {
        kind: MeshKind,
        output: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0,0")]
        center: Vec<f64>,
        /// Box edge lengths.
        #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
        dims: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Ellipsoid semi-axes.
        #[arg(long, value_delimiter = ',', default_value = "1,1,1")]
        radii: Vec<f64>,
        /// Cylinder axis or plane normal.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0,1")]
        axis: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        /// Plane side length.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
    },
    /// Start the viewer service.
    Serve(medkit_server::ServeArgs),
}

#[derive(clap::Args)]
struct RegisterArgs {
    #[arg(long)]
    fixed: PathBuf,
    #[arg(long)]
    moving: PathBuf,
    #[arg(long, default_value = "ncc")]
    metric: Metric,
    #[arg(long, default_value = "lbfgs")]
    optimizer: Optimizer,
    /// Starting parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Moving image warped onto the fixed grid.
    #[arg(long)]
    warped: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeshKind {
    Box,
    Sphere,
    Ellipsoid,
    Cylinder,
    Plane,
}

fn read(path: &Path) -> Result<Image> {
    io::read_image(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, image: &Image, element_type: Option<PixelType>) -> Result<()> {
    io::write_image(path, image, element_type).with_context(|| format!("writing {}", path.display()))
}

fn print(value: serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn info(path: &Path) -> Result<()> {
    if MeshFormat::from_path(path).is_some() {
        let mesh = io::read_mesh(path).with_context(|| format!("reading {}", path.display()))?;
        let attributes: Vec<&str> = mesh.attributes().iter().map(|a| a.name.as_str()).collect();
        return print(json!({
            "points": mesh.points().len(),
            "triangles": mesh.triangles().len(),
            "attributes": attributes,
        }));
    }
    let im = read(path)?;
    let (lo, hi) = im.value_range();
    print(json!({
        "ndim": im.ndim(),
        "size": im.size(),
        "spacing": im.spacing(),
        "origin": im.origin(),
        "orientation": im.orientation(),
        "value_range": [lo, hi],
    }))
}

fn convert(input: &Path, output: &Path, element_type: Option<PixelType>) -> Result<()> {
    if MeshFormat::from_path(input).is_some() {
        let mesh = io::read_mesh(input).with_context(|| format!("reading {}", input.display()))?;
        return io::write_mesh(output, &mesh).with_context(|| format!("writing {}", output.display()));
    }
    write(output, &read(input)?, element_type)
}

fn summary(r: &RegistrationResult) -> serde_json::Value {
    json!({
        "params": r.params,
        "cost_initial": r.cost_initial,
        "cost_final": r.cost_final,
        "iterations": r.iterations,
        "converged": r.converged,
    })
}

fn run_registration(
    a: &RegisterArgs,
    fixed: &Image,
    moving: &Image,
    transform: TransformModel,
) -> Result<RegistrationResult> {
    let mut options = OptimOptions::default();
    if let Some(n) = a.max_iter {
        options.max_iter = n;
    }
    let r = register(&RegistrationProblem {
        fixed,
        moving,
        transform,
        metric: a.metric,
        optimizer: a.optimizer,
        x0: a.x0.clone(),
        options,
    })?;
    if let Some(path) = &a.warped {
        write(path, &r.warped, None)?;
    }
    Ok(r)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Info { input } => info(&input),
        Command::Convert {
            input,
            output,
            element_type,
        } => convert(&input, &output, element_type),
        Command::Resample {
            input,
            output,
            spacing,
            spacing_and_size,
            spacing_size_centre,
            reference,
            interpolation,
            blur_neigh,
            blur_sigma,
        } => {
            let im = read(&input)?;
            let reference = reference.as_deref().map(read).transpose()?;
            let grid = GridSpec::from_options(
                im.ndim(),
                reference.as_ref(),
                spacing.as_deref(),
                spacing_and_size.as_deref(),
                spacing_size_centre.as_deref(),
            )?;
            let blur = match (blur_neigh, blur_sigma) {
                (Some(neigh), Some(sigma)) => Some(Blur { neigh, sigma }),
                _ => None,
            };
            let out = resample(&im, &grid, &ResampleOptions { interpolation, blur })?;
            write(&output, &out, None)
        }
        Command::Crop { input, output, bounds } => write(&output, &crop(&read(&input)?, &bounds)?, None),
        Command::Reslice {
            input,
            output,
            normal,
            point,
            spacing,
            thickness,
            interpolation,
            flat,
        } => {
            let im = read(&input)?;
            let point = point.unwrap_or_else(|| im.geometric_centre());
            let frame = match normal {
                Some(n) => SliceFrame::from_plane(&n, &point)?,
                None => SliceFrame::axial(&point)?,
            };
            let spacing = match spacing.as_deref() {
                None => None,
                Some(&[su, sv]) => Some([su, sv]),
                Some(other) => bail!("--spacing needs 2 values, got {}", other.len()),
            };
            let opts = ResliceOptions {
                spacing,
                thickness,
                interpolation,
            };
            let (s3, s2) = reslice(&im, &frame, &opts)?;
            write(&output, if flat { &s2 } else { &s3 }, None)
        }
        Command::Gradient {
            input,
            outputs,
            order,
            sigma,
        } => {
            let im = read(&input)?;
            if outputs.len() != im.ndim() {
                bail!(
                    "a {}D image needs {} outputs, got {}",
                    im.ndim(),
                    im.ndim(),
                    outputs.len()
                );
            }
            let g = gradient(&im, &GradientOptions { order, sigma })?;
            for (path, component) in outputs.iter().zip(&g) {
                write(path, component, None)?;
            }
            Ok(())
        }
        Command::Blur {
            input,
            output,
            neigh,
            sigma,
        } => write(&output, &blur(&read(&input)?, &Blur { neigh, sigma })?, None),
        Command::RegisterRigid { common, out } => {
            let (fixed, moving) = (read(&common.fixed)?, read(&common.moving)?);
            let r = run_registration(&common, &fixed, &moving, TransformModel::Rigid)?;
            let m = r.matrix.as_ref().expect("rigid results carry a matrix");
            if let Some(path) = &out {
                io::write_itk_matrix(path, &embed_matrix4(m)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
            let mut s = summary(&r);
            s["matrix"] = json!(rows);
            print(s)
        }
        Command::RegisterFfd {
            common,
            grid_spacing,
            degree,
            levels,
            out,
        } => {
            let (fixed, moving) = (read(&common.fixed)?, read(&common.moving)?);
            let state = ffd_initialize(&fixed, degree, levels, &grid_spacing, FfdBounds::Image)?;
            let r = run_registration(&common, &fixed, &moving, TransformModel::Ffd(state))?;
            let s = summary(&r);
            if let Some(path) = &out {
                std::fs::write(path, serde_json::to_string_pretty(&s)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            print(s)
        }
        Command::MeshSource {
            kind,
            output,
            center,
            dims,
            radius,
            radii,
            axis,
            height,
            scale,
            resolution,
        } => {
            let mesh = match kind {
                MeshKind::Box => box_mesh(&center, &dims)?,
                MeshKind::Sphere => sphere_mesh(&center, radius, resolution)?,
                MeshKind::Ellipsoid => ellipsoid_mesh(&center, &radii, resolution)?,
                MeshKind::Cylinder => cylinder_mesh(&axis, &center, radius, height, resolution)?,
                MeshKind::Plane => plane_mesh(&center, &axis, scale)?,
            };
            io::write_mesh(&output, &mesh).with_context(|| format!("writing {}", output.display()))
        }
        Command::Serve(args) => medkit_server::run(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("medkit: error: {msg}");
            ExitCode::from(1)
        }
    }
}
