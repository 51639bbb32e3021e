use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use medkit_core::io::{self, ImageFormat, PixelType};
use medkit_core::metrics::Metric;
use medkit_core::optim::OptimOptions;
use medkit_core::processing::{rasterize_ellipse, rasterize_polygon};
use medkit_core::registration::{register, Optimizer, RegistrationProblem, TransformModel};
use medkit_core::transforms::{ffd_initialize, FfdBounds};
use medkit_core::Image;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{ApiError, ApiResult};
use crate::render::{frame_for, render, slice_of, volume_of, RenderSpec};
use crate::store::{Entry, ImageInfo};
use crate::AppState;

type AppRef = State<Arc<AppState>>;

const BODY_LIMIT: usize = 1 << 30;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/images", get(list_images).post(upload))
        .route("/images/{id}", get(image_info))
        .route("/images/{id}/slice", get(slice))
        .route("/images/{id}/frame-matrix", get(frame_matrix))
        .route("/images/{id}/mask", post(mask))
        .route("/images/{id}/export", get(export))
        .route("/register", post(register_images))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn list_images(State(app): AppRef) -> Json<Vec<ImageInfo>> {
    Json(app.store.list())
}

async fn image_info(State(app): AppRef, Path(id): Path<String>) -> ApiResult<Json<ImageInfo>> {
    let entry = app.store.get(&id)?;
    Ok(Json(ImageInfo::of(&id, &entry)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathUpload {
    path: String,
    format: Option<String>,
}

#[derive(Deserialize)]
struct UploadQuery {
    format: Option<String>,
    filename: Option<String>,
}

fn format_named(name: &str) -> ApiResult<ImageFormat> {
    ImageFormat::from_name(name).ok_or_else(|| ApiError::unsupported(format!("unknown image format '{name}'")))
}

fn format_of_path(path: &FsPath) -> ApiResult<ImageFormat> {
    ImageFormat::from_path(path)
        .ok_or_else(|| ApiError::unsupported(format!("no known format for '{}'", path.display())))
}

/// Resolves `rel` under `root`, refusing anything that ends up outside it.
fn resolve(root: &FsPath, rel: &str) -> ApiResult<PathBuf> {
    let root = root
        .canonicalize()
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "data_dir", e.to_string()))?;
    let path = root
        .join(rel)
        .canonicalize()
        .map_err(|_| ApiError::not_found("file", rel))?;
    if !path.starts_with(&root) {
        return Err(ApiError::bad_request(format!("'{rel}' is outside the data directory")));
    }
    Ok(path)
}

fn is_json(headers: &HeaderMap) -> bool {
    headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"))
}

/// `POST /images`: a JSON body `{"path", "format"?}` names a file under the
/// data directory; any other body is the file itself, with its format given
/// by `?format=` or `?filename=`.
async fn upload(
    State(app): AppRef,
    Query(q): Query<UploadQuery>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Json<ImageInfo>> {
    let (name, image) = if is_json(&headers) {
        let req: PathUpload = parse_json(&body)?;
        let path = resolve(&app.config.data_dir, &req.path)?;
        let format = match &req.format {
            Some(f) => format_named(f)?,
            None => format_of_path(&path)?,
        };
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let image = tokio::task::spawn_blocking(move || match format {
            ImageFormat::Mhd => io::read_mhd(&path).map_err(ApiError::from),
            _ => {
                let bytes = std::fs::read(&path)
                    .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "io", format!("{}: {e}", path.display())))?;
                io::read_image_bytes(&bytes, format).map_err(ApiError::from)
            }
        })
        .await
        .map_err(join_error)??;
        (name, image)
    } else {
        let format = match (&q.format, &q.filename) {
            (Some(f), _) => format_named(f)?,
            (None, Some(name)) => format_of_path(FsPath::new(name))?,
            (None, None) => return Err(ApiError::bad_request("raw uploads need ?format= or ?filename=")),
        };
        if body.is_empty() {
            return Err(ApiError::bad_request("empty upload"));
        }
        let name = q.filename.clone().unwrap_or_default();
        let image = tokio::task::spawn_blocking(move || io::read_image_bytes(&body, format))
            .await
            .map_err(join_error)??;
        (name, image)
    };
    let (id, entry) = app.store.insert(Entry::new(name, image));
    Ok(Json(ImageInfo::of(&id, &entry)))
}

fn join_error(e: tokio::task::JoinError) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
}

#[derive(Deserialize)]
struct SpecQuery {
    spec: Option<String>,
}

async fn slice(State(app): AppRef, Path(id): Path<String>, Query(q): Query<SpecQuery>) -> ApiResult<Response> {
    let entry = app.store.get(&id)?;
    let spec = RenderSpec::parse(q.spec.as_deref())?;
    let out = tokio::task::spawn_blocking(move || render(&entry, &spec, &app.store))
        .await
        .map_err(join_error)??;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static("image/png"));
    let mut put = |name: &'static str, value: String| {
        headers.insert(name, HeaderValue::from_str(&value).expect("ascii header"));
    };
    put("x-slice-size", format!("{},{}", out.size[0], out.size[1]));
    put("x-slice-spacing", join(&out.spacing));
    put("x-slice-origin", join(&out.origin));
    Ok((headers, out.png).into_response())
}

async fn frame_matrix(
    State(app): AppRef,
    Path(id): Path<String>,
    Query(q): Query<SpecQuery>,
) -> ApiResult<Json<Value>> {
    let entry = app.store.get(&id)?;
    let spec = RenderSpec::parse(q.spec.as_deref())?;
    let volume = volume_of(&entry.image, &spec)?;
    if volume.ndim() != 3 {
        return Err(ApiError::bad_request("frame matrices need a 3D or 4D image"));
    }
    let m = frame_for(&volume, &spec)?.matrix();
    let column_major: Vec<f64> = (0..16).map(|i| m[i % 4][i / 4]).collect();
    Ok(Json(json!({ "matrix": m, "column_major": column_major })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskRequest {
    spec: Option<RenderSpec>,
    polygon: Option<Vec<Vec<f64>>>,
    ellipse: Option<EllipseShape>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EllipseShape {
    center: Vec<f64>,
    radii: [f64; 2],
    #[serde(default)]
    angle: f64,
}

/// Maps a vertex to the 2D world frame of the slice. Three components are a
/// world point of the volume, projected onto the slice plane.
fn to_plane(p: &[f64], s3: Option<&Image>, s2: &Image) -> ApiResult<[f64; 2]> {
    match (p.len(), s3) {
        (2, _) => Ok([p[0], p[1]]),
        (3, Some(s3)) => {
            let c = s3.continuous_index(p)?;
            let w = s2.index_to_world(&c[..2])?;
            Ok([w[0], w[1]])
        }
        (n, _) => Err(ApiError::bad_request(format!(
            "vertices need {} coordinates, got {n}",
            if s3.is_some() { "2 or 3" } else { "2" }
        ))),
    }
}

/// `POST /images/{id}/mask`: rasterizes a polygon or ellipse on the slice
/// selected by `spec` and stores it as a new image.
async fn mask(State(app): AppRef, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let entry = app.store.get(&id)?;
    let req: MaskRequest = parse_json(&body)?;
    let spec = req.spec.unwrap_or_default();
    let volume = volume_of(&entry.image, &spec)?;
    let slice = slice_of(&volume, &spec)?;
    let (s3, s2) = (slice.volume.as_ref(), &slice.plane);
    let mask = match (&req.polygon, &req.ellipse) {
        (Some(poly), None) => {
            let verts = poly
                .iter()
                .map(|p| to_plane(p, s3, s2))
                .collect::<ApiResult<Vec<_>>>()?;
            rasterize_polygon(s2, &verts)?
        }
        (None, Some(e)) => rasterize_ellipse(s2, to_plane(&e.center, s3, s2)?, e.radii, e.angle)?,
        _ => return Err(ApiError::bad_request("give exactly one of 'polygon' and 'ellipse'")),
    };
    let sum: f64 = mask.data().iter().sum();
    let size = mask.size().to_vec();
    let stored = match s3 {
        Some(s3) => Image::from_data(s3.geometry().clone(), mask.into_data())?,
        None => mask,
    };
    let (mask_id, _) = app.store.insert(Entry::new(format!("{}-mask", entry.name), stored));
    Ok(Json(json!({ "mask_id": mask_id, "sum": sum, "size": size })))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
    element_type: Option<String>,
}

/// `GET /images/{id}/export`: `mhd` and `mha` give a single MetaImage stream
/// with an embedded payload, `gipl` a GIPL file.
async fn export(State(app): AppRef, Path(id): Path<String>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let entry = app.store.get(&id)?;
    let element_type = q.element_type.as_deref().map(str::parse::<PixelType>).transpose()?;
    let format = q.format.as_deref().unwrap_or("mhd").to_ascii_lowercase();
    let (bytes, ext) = match format.as_str() {
        "mhd" | "mha" => (io::write_mha_bytes(&entry.image, element_type), format.as_str()),
        "gipl" => (
            io::write_gipl_bytes(&entry.image, element_type.unwrap_or(PixelType::F64))?,
            "gipl",
        ),
        other => return Err(ApiError::unsupported(format!("cannot export as '{other}'"))),
    };
    let disposition = format!("attachment; filename=\"{id}.{ext}\"");
    let headers = [
        (header::CONTENT_TYPE, "application/octet-stream".to_string()),
        (header::CONTENT_DISPOSITION, disposition),
    ];
    Ok((headers, bytes).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterRequest {
    fixed_id: String,
    moving_id: String,
    #[serde(default = "rigid")]
    transform: String,
    #[serde(default = "ncc")]
    metric: String,
    optimizer: Option<String>,
    x0: Option<Vec<f64>>,
    ffd: Option<FfdRequest>,
    max_iter: Option<usize>,
}

fn rigid() -> String {
    "rigid".into()
}

fn ncc() -> String {
    "ncc".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FfdRequest {
    #[serde(default = "one")]
    degree: usize,
    #[serde(default = "one")]
    levels: usize,
    grid_spacing: Vec<f64>,
}

fn one() -> usize {
    1
}

/// `POST /register`: runs a registration on a blocking thread under the
/// configured timeout and stores the warped moving image.
async fn register_images(State(app): AppRef, body: Bytes) -> ApiResult<Json<Value>> {
    let req: RegisterRequest = parse_json(&body)?;
    let fixed = app.store.get(&req.fixed_id)?;
    let moving = app.store.get(&req.moving_id)?;
    let metric: Metric = req.metric.parse()?;
    let optimizer: Optimizer = match &req.optimizer {
        Some(o) => o.parse()?,
        None => Optimizer::default(),
    };
    if fixed.image.ndim() != moving.image.ndim() {
        return Err(ApiError::unprocessable(format!(
            "fixed image is {}D, moving image is {}D",
            fixed.image.ndim(),
            moving.image.ndim()
        )));
    }
    let transform = match req.transform.to_ascii_lowercase().as_str() {
        "rigid" => TransformModel::Rigid,
        "ffd" => {
            let f = req
                .ffd
                .as_ref()
                .ok_or_else(|| ApiError::bad_request("an ffd transform needs 'ffd': {grid_spacing, ...}"))?;
            TransformModel::Ffd(ffd_initialize(
                &fixed.image,
                f.degree,
                f.levels,
                &f.grid_spacing,
                FfdBounds::Image,
            )?)
        }
        other => {
            return Err(ApiError::bad_request(format!(
                "unknown transform '{other}' (expected rigid or ffd)"
            )))
        }
    };
    let mut options = OptimOptions::default();
    if let Some(n) = req.max_iter {
        options.max_iter = n;
    }
    let x0 = req.x0.clone();
    let job = tokio::task::spawn_blocking(move || {
        register(&RegistrationProblem {
            fixed: &fixed.image,
            moving: &moving.image,
            transform,
            metric,
            optimizer,
            x0,
            options,
        })
    });
    let result = tokio::time::timeout(app.config.register_timeout, job)
        .await
        .map_err(|_| ApiError::new(StatusCode::GATEWAY_TIMEOUT, "timeout", "registration timed out"))?
        .map_err(join_error)??;
    let matrix = result.matrix.as_ref().map(|m| {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    });
    let (warped_id, _) = app.store.insert(Entry::new("warped", result.warped));
    Ok(Json(json!({
        "params": result.params,
        "matrix": matrix,
        "cost_initial": result.cost_initial,
        "cost_final": result.cost_final,
        "iterations": result.iterations,
        "converged": result.converged,
        "termination": format!("{:?}", result.termination),
        "warped_id": warped_id,
    })))
}
