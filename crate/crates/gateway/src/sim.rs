//! Headless guidance sessions: scripted event replay and an autopilot that
//! reaches for each product the way a cooperative shopper would.

use shelfguide_core::catalog::CatalogEntry;
use shelfguide_core::simulator::{GuidanceSession, SessionError, SessionEvent, SessionMessage, SessionPhase};

use crate::GatewayError;

/// Adds `entry` to the session list, answering an ambiguity prompt with the
/// entry's own barcode.
pub fn add_list_entry(session: &mut GuidanceSession, entry: &CatalogEntry) -> Result<(), GatewayError> {
    let query = |choice| SessionEvent::ListQuery {
        brand: entry.brand.clone(),
        name: entry.name.clone(),
        quantity: entry.quantity.clone(),
        choice,
    };
    match session.apply(query(None)) {
        Ok(_) => Ok(()),
        Err(SessionError::Ambiguous { candidates }) => {
            let i = candidates.iter().position(|c| c.barcode == entry.barcode).ok_or_else(|| {
                GatewayError::Config(format!("{} is not among the offered candidates", entry.display_name()))
            })?;
            session.apply(query(Some(i)))?;
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

/// Parses JSON-lines events; blank lines and `#` comments are skipped.
pub fn parse_events(text: &str) -> Result<Vec<SessionEvent>, GatewayError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| GatewayError::Config(format!("event line {}: {e}", i + 1))))
        .collect()
}

pub fn replay(session: &mut GuidanceSession, events: Vec<SessionEvent>) -> Result<Vec<SessionMessage>, GatewayError> {
    let mut out = Vec::new();
    for event in events {
        out.extend(session.apply(event)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct Autopilot {
    /// Rest on a neighbouring product first, to draw a correction.
    pub touch_wrong_first: bool,
    /// Frames to wait for a lock before giving up on an item.
    pub search_budget: u32,
    /// Frames after which the run stops regardless.
    pub max_frames: u64,
}

impl Default for Autopilot {
    fn default() -> Self {
        Self {
            touch_wrong_first: false,
            search_budget: 300,
            max_frames: 20_000,
        }
    }
}

impl Autopilot {
    /// Runs until the list is done or a budget runs out.
    pub fn run(&self, session: &mut GuidanceSession) -> Result<Vec<SessionMessage>, GatewayError> {
        let mut out: Vec<SessionMessage> = Vec::new();
        let dwell = 90;
        let mut corrected_item = None;
        while session.phase() != SessionPhase::Done {
            let snap = session.snapshot();
            if snap.frame_idx >= self.max_frames {
                break;
            }
            let current = snap.current;
            match snap.phase {
                SessionPhase::Listing => out.extend(session.apply(SessionEvent::Tick { frames: 1 })?),
                SessionPhase::Searching => {
                    let mut waited = 0;
                    while session.phase() == SessionPhase::Searching && waited < self.search_budget {
                        out.extend(session.apply(SessionEvent::Tick { frames: 1 })?);
                        waited += 1;
                    }
                    if session.phase() == SessionPhase::Searching {
                        tracing::warn!(item = ?current, "target not found, stopping");
                        break;
                    }
                }
                SessionPhase::Navigating | SessionPhase::Correcting => {
                    let Some(last) = out.last() else {
                        out.extend(session.apply(SessionEvent::Tick { frames: 1 })?);
                        continue;
                    };
                    let Some(target) = last.scene.target else {
                        out.extend(session.apply(SessionEvent::Tick { frames: 1 })?);
                        continue;
                    };
                    let mut aim = target.center();
                    if self.touch_wrong_first && corrected_item != current {
                        corrected_item = current;
                        let neighbour = last
                            .scene
                            .products
                            .iter()
                            .filter(|p| !p.bbox.contains(aim))
                            .min_by(|a, b| a.bbox.center().distance(&aim).total_cmp(&b.bbox.center().distance(&aim)));
                        if let Some(n) = neighbour {
                            aim = n.bbox.center();
                        }
                    }
                    out.extend(session.apply(SessionEvent::HandMove { position: Some(aim) })?);
                    out.extend(session.apply(SessionEvent::Tick { frames: dwell - 1 })?);
                    if session.snapshot().current == current && session.phase() != SessionPhase::Correcting {
                        // anchor drifted off the product; re-aim on the next pass
                        out.extend(session.apply(SessionEvent::HandMove { position: None })?);
                    }
                }
                SessionPhase::Done => {}
            }
        }
        Ok(out)
    }
}
