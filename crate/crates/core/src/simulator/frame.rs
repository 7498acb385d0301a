use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::camera::{Camera, CameraPose, Intrinsics};
use super::world::{ShelfSpec, BACKGROUND};
use crate::geometry::{BBox, Point};
use crate::guidance::ShelfCell;
use crate::matching::{pixel_window, RgbImage};
use crate::perception::{FrameView, ObjectBoxes};

/// Share of a product's projected box that must be inside the frame for it to count as in view.
pub const MIN_VISIBLE_FRACTION: f64 = 0.5;

/// Ground truth for one product in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductView {
    pub cell: ShelfCell,
    pub barcode: String,
    /// Clipped box; `None` when out of view.
    pub bbox: Option<BBox>,
    /// Unclipped projected area in pixels (0 when behind the camera).
    pub area_px: f64,
    pub visible_fraction: f64,
    pub obliquity_deg: f64,
    /// Pixels the face would cover at the image centre: `f²·A·cosθ / d²`.
    /// Unlike `area_px` this does not depend on where the camera points.
    pub apparent_area_px: f64,
}

/// A rendered-on-demand camera frame over the synthetic shelf.
#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub index: u64,
    /// Key for per-trial noise draws; frames sharing a key share draws.
    pub noise_key: u64,
    pub pose: CameraPose,
    pub camera: Camera,
    pub shelf: Arc<ShelfSpec>,
    pub ground_truth: Vec<ProductView>,
    pub hand: Option<Point>,
}

/// Projects every product face through the posed camera.
pub fn project_shelf(shelf: &Arc<ShelfSpec>, pose: &CameraPose, intrinsics: Intrinsics) -> SyntheticFrame {
    let camera = Camera::new(intrinsics, pose, shelf.aim_point());
    let (w, h) = (intrinsics.width as f64, intrinsics.height as f64);
    let ground_truth = shelf
        .cells()
        .map(|cell| {
            let face = shelf.face(cell).expect("every cell has a face");
            let (cx, cy) = face.center();
            let product = shelf.product(cell).expect("every cell has a product");
            let corners: Option<Vec<(f64, f64)>> = face
                .corners()
                .iter()
                .map(|&(x, y)| camera.project([x, y, 0.0]))
                .collect();
            let front = camera.position[2] > 0.0;
            let (bbox, area_px, visible_fraction) = match corners.filter(|_| front) {
                Some(pts) => {
                    let x0 = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                    let x1 = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                    let y0 = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                    let y1 = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
                    let full = BBox::from_corners(x0, y0, x1, y1);
                    let clipped = full.clip(w, h);
                    let frac = clipped.map_or(0.0, |c| c.area() / full.area());
                    let bbox = clipped.filter(|_| frac >= MIN_VISIBLE_FRACTION);
                    (bbox, full.area(), frac)
                }
                None => (None, 0.0, 0.0),
            };
            let obliquity_deg = camera.obliquity_deg([cx, cy, 0.0]);
            let d2 = (camera.position[0] - cx).powi(2) + (camera.position[1] - cy).powi(2) + camera.position[2].powi(2);
            let (fw, fh) = product.size.face_m();
            let apparent_area_px = if front {
                intrinsics.focal_px().powi(2) * fw * fh * obliquity_deg.to_radians().cos() / d2
            } else {
                0.0
            };
            ProductView {
                cell,
                barcode: product.barcode.clone(),
                bbox,
                area_px,
                visible_fraction,
                obliquity_deg,
                apparent_area_px,
            }
        })
        .collect();
    SyntheticFrame {
        index: 0,
        noise_key: 0,
        pose: *pose,
        camera,
        shelf: Arc::clone(shelf),
        ground_truth,
        hand: None,
    }
}

impl SyntheticFrame {
    pub fn width(&self) -> u32 {
        self.camera.intrinsics.width
    }

    pub fn height(&self) -> u32 {
        self.camera.intrinsics.height
    }

    pub fn view(&self, cell: ShelfCell) -> Option<&ProductView> {
        self.ground_truth.iter().find(|v| v.cell == cell)
    }

    pub fn visible(&self) -> impl Iterator<Item = (&ProductView, BBox)> {
        self.ground_truth.iter().filter_map(|v| v.bbox.map(|b| (v, b)))
    }

    /// Cell and box of every product in view.
    pub fn cell_boxes(&self) -> Vec<(ShelfCell, BBox)> {
        self.visible().map(|(v, b)| (v.cell, b)).collect()
    }

    fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        match self.camera.shelf_hit(x as f64 + 0.5, y as f64 + 0.5) {
            Some((sx, sy)) => self.shelf.color_at(sx, sy),
            None => BACKGROUND,
        }
    }

    fn render_window(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> RgbImage {
        RgbImage::from_fn(x1 - x0, y1 - y0, |x, y| self.pixel(x0 + x, y0 + y))
    }

    /// Full frame. Prefer `crop` when only a region is needed.
    pub fn render(&self) -> RgbImage {
        self.render_window(0, 0, self.width(), self.height())
    }
}

impl FrameView for SyntheticFrame {
    fn index(&self) -> u64 {
        self.index
    }

    fn size(&self) -> (u32, u32) {
        (self.width(), self.height())
    }

    fn crop(&self, bbox: &BBox) -> Option<RgbImage> {
        let clipped = bbox.clip(self.width() as f64, self.height() as f64)?;
        let (x0, y0, x1, y1) = pixel_window(&clipped, self.width(), self.height())?;
        Some(self.render_window(x0, y0, x1, y1))
    }
}

impl ObjectBoxes for SyntheticFrame {
    fn object_boxes(&self) -> Vec<BBox> {
        self.visible().map(|(_, b)| b).collect()
    }
}
