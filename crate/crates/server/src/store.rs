use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use medkit_core::Image;
use serde::Serialize;

use crate::error::{ApiError, ApiResult};

/// A stored image with its display defaults. Entries are never mutated;
/// derived images get new ids.
#[derive(Debug)]
pub struct Entry {
    pub name: String,
    pub image: Image,
    pub window: f64,
    pub level: f64,
    pub colormap: String,
}

impl Entry {
    pub fn new(name: impl Into<String>, image: Image) -> Self {
        let (lo, hi) = image.value_range();
        let (lo, hi) = if lo.is_finite() && hi.is_finite() {
            (lo, hi)
        } else {
            (0.0, 1.0)
        };
        let window = if hi > lo { hi - lo } else { 1.0 };
        Self {
            name: name.into(),
            image,
            window,
            level: (lo + hi) / 2.0,
            colormap: "gray".into(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ImageInfo {
    pub id: String,
    pub name: String,
    pub ndim: usize,
    pub size: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    /// Row-major direction cosines.
    pub orientation: Vec<f64>,
    pub value_range: [f64; 2],
    pub frames: usize,
    pub window: f64,
    pub level: f64,
    pub colormap: String,
}

impl ImageInfo {
    pub fn of(id: &str, e: &Entry) -> Self {
        let im = &e.image;
        let (lo, hi) = im.value_range();
        Self {
            id: id.to_string(),
            name: e.name.clone(),
            ndim: im.ndim(),
            size: im.size().to_vec(),
            spacing: im.spacing().to_vec(),
            origin: im.origin().to_vec(),
            orientation: im.orientation().to_vec(),
            value_range: [lo, hi],
            frames: if im.ndim() == 4 { im.size()[3] } else { 1 },
            window: e.window,
            level: e.level,
            colormap: e.colormap.clone(),
        }
    }
}

#[derive(Default)]
pub struct Store {
    entries: RwLock<HashMap<String, Arc<Entry>>>,
    next: AtomicU64,
}

impl Store {
    pub fn insert(&self, entry: Entry) -> (String, Arc<Entry>) {
        let id = format!("img{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        let entry = Arc::new(entry);
        self.entries
            .write()
            .expect("store lock poisoned")
            .insert(id.clone(), entry.clone());
        (id, entry)
    }

    pub fn get(&self, id: &str) -> ApiResult<Arc<Entry>> {
        self.entries
            .read()
            .expect("store lock poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("image", id))
    }

    pub fn list(&self) -> Vec<ImageInfo> {
        let map = self.entries.read().expect("store lock poisoned");
        let mut out: Vec<ImageInfo> = map.iter().map(|(id, e)| ImageInfo::of(id, e)).collect();
        out.sort_by_key(|i| i.id.trim_start_matches("img").parse::<u64>().unwrap_or(u64::MAX));
        out
    }
}
