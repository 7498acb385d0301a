//! Shopping-list construction from typed or scripted requests.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use shelfguide_core::catalog::{
    fetch_reference_images, filter_catalog, resolve_product, Candidate, Catalog, CatalogEntry, CatalogRecord,
    FilterConfig, ImageSource, ProductQuery,
};

use crate::GatewayError;

/// One scripted request. `choice` indexes the offered top three; without it
/// the best-ranked candidate is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListRequest {
    pub brand: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice: Option<usize>,
}

/// JSON lines; blank lines and `#` comments are skipped.
pub fn parse_script(text: &str) -> Result<Vec<ListRequest>, GatewayError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| GatewayError::Config(format!("script line {}: {e}", i + 1))))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct ListOutcome {
    pub items: Vec<CatalogEntry>,
    /// Request and reason for every request that produced no item.
    pub failures: Vec<(ListRequest, String)>,
}

/// Resolves one request. `choose` sees the offered candidates when there is
/// more than one.
pub fn resolve_request<F>(
    catalog: &Catalog,
    filter: &FilterConfig,
    images: Option<&dyn ImageSource>,
    req: &ListRequest,
    choose: F,
) -> Result<CatalogEntry, GatewayError>
where
    F: FnMut(&[Candidate]) -> Option<usize>,
{
    let query = ProductQuery::new(&req.brand, &req.name, req.quantity.as_deref())?;
    let mut shortlist = filter_catalog(&query, catalog.entries(), filter)?;
    let entry = resolve_product(&mut shortlist, choose)?;
    if let Some(images) = images {
        fetch_reference_images(&entry, images)?;
    }
    Ok(entry)
}

/// Scripted list building; a failed request is reported, not fatal.
pub fn build_from_script(
    catalog: &Catalog,
    filter: &FilterConfig,
    images: Option<&dyn ImageSource>,
    requests: &[ListRequest],
) -> ListOutcome {
    let mut out = ListOutcome::default();
    for req in requests {
        match resolve_request(catalog, filter, images, req, |_| Some(req.choice.unwrap_or(0))) {
            Ok(e) => out.items.push(e),
            Err(e) => out.failures.push((req.clone(), e.to_string())),
        }
    }
    out
}

fn prompt_line(input: &mut impl BufRead, output: &mut impl Write, label: &str) -> std::io::Result<Option<String>> {
    write!(output, "{label}> ")?;
    output.flush()?;
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    Ok(Some(line.trim().to_string()))
}

/// Question-and-answer loop: brand, name, optional quantity, then a pick
/// among the top three when needed. An empty brand or end of input stops.
pub fn build_interactive(
    catalog: &Catalog,
    filter: &FilterConfig,
    images: Option<&dyn ImageSource>,
    input: &mut impl BufRead,
    output: &mut impl Write,
) -> Result<ListOutcome, GatewayError> {
    let mut out = ListOutcome::default();
    loop {
        let Some(brand) = prompt_line(input, output, "brand (empty to finish)")?.filter(|b| !b.is_empty()) else {
            break;
        };
        let Some(name) = prompt_line(input, output, "product name")? else { break };
        let quantity = prompt_line(input, output, "quantity (optional)")?.filter(|q| !q.is_empty());
        let req = ListRequest { brand, name, quantity, choice: None };
        let mut io_err = None;
        let result = resolve_request(catalog, filter, images, &req, |offered| {
            let _ = writeln!(output, "Several products match:");
            for (i, c) in offered.iter().enumerate() {
                let _ = writeln!(output, "  {}) {} [{:.2}]", i + 1, c.entry.display_name(), c.score);
            }
            match prompt_line(input, output, "choice (number, empty to skip)") {
                Ok(Some(s)) => s.parse::<usize>().ok().and_then(|n| n.checked_sub(1)),
                Ok(None) => None,
                Err(e) => {
                    io_err = Some(e);
                    None
                }
            }
        });
        if let Some(e) = io_err {
            return Err(e.into());
        }
        match result {
            Ok(e) => {
                writeln!(output, "added {}", e.display_name())?;
                out.items.push(e);
            }
            Err(e) => {
                writeln!(output, "not added: {e}")?;
                out.failures.push((req, e.to_string()));
            }
        }
    }
    Ok(out)
}

/// Lists are stored in the catalog line format.
pub fn write_list(path: &Path, items: &[CatalogEntry]) -> Result<(), GatewayError> {
    let mut body = String::new();
    for e in items {
        body.push_str(&serde_json::to_string(&CatalogRecord::from(e)).expect("record serializes"));
        body.push('\n');
    }
    std::fs::write(path, body)?;
    Ok(())
}

pub fn read_list(path: &Path) -> Result<Vec<CatalogEntry>, GatewayError> {
    let file = std::fs::File::open(path).map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
    let catalog = Catalog::from_reader(file).map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
    Ok(catalog.entries().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Catalog {
        let e = |b: &str, brand: &str, name: &str, q: Option<&str>| CatalogEntry::new(b, brand, name, q, vec![]).unwrap();
        Catalog::from_entries(vec![
            e("1", "Spindrift", "Unsweetened Lime Sparkling Water", Some("12 fl oz")),
            e("2", "Spindrift", "Grapefruit Sparkling Water", Some("12 fl oz")),
            e("3", "Ritz", "Original Crackers", None),
            e("4", "Ritz", "Original Cracker", None),
        ])
        .unwrap()
    }

    #[test]
    fn script_parsing() {
        let reqs = parse_script("# list\n{\"brand\":\"Ritz\",\"name\":\"Original Crackers\"}\n\n{\"brand\":\"a\",\"name\":\"b\",\"choice\":1}\n").unwrap();
        assert_eq!(reqs.len(), 2);
        assert_eq!(reqs[1].choice, Some(1));
        assert!(parse_script("{\"brand\":\"a\"}").unwrap_err().is_config());
        assert!(parse_script("{\"brand\":\"a\",\"name\":\"b\",\"colour\":1}").is_err());
    }

    #[test]
    fn scripted_build_reports_failures() {
        let reqs = vec![
            ListRequest { brand: "spindrift".into(), name: "Lime Sparkling Water, unsweetened".into(), quantity: None, choice: None },
            ListRequest { brand: "Ritz".into(), name: "Original Cracker".into(), quantity: None, choice: Some(1) },
            ListRequest { brand: "Oreo".into(), name: "Cookies".into(), quantity: None, choice: None },
        ];
        let out = build_from_script(&catalog(), &FilterConfig::default(), None, &reqs);
        let got: Vec<&str> = out.items.iter().map(|e| e.barcode.as_str()).collect();
        assert_eq!(got, ["1", "3"]);
        assert_eq!(out.failures.len(), 1);
        assert!(out.failures[0].1.contains("filter"), "{}", out.failures[0].1);
    }

    #[test]
    fn interactive_session() {
        let typed = "Ritz\nOriginal Crackers\n\n2\nspindrift\nunsweetened lime sparkling water\n12 fl oz\nnope\nnope\n\n\n";
        let mut input = std::io::Cursor::new(typed);
        let mut output = Vec::new();
        let out = build_interactive(&catalog(), &FilterConfig::default(), None, &mut input, &mut output).unwrap();
        let text = String::from_utf8(output).unwrap();
        assert!(text.contains("1) Ritz Original Crackers"), "{text}");
        let got: Vec<&str> = out.items.iter().map(|e| e.barcode.as_str()).collect();
        assert_eq!(got, ["4", "1"]);
        assert_eq!(out.failures.len(), 1);
    }

    #[test]
    fn list_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("list.jsonl");
        let items = catalog().entries()[..2].to_vec();
        write_list(&path, &items).unwrap();
        assert_eq!(read_list(&path).unwrap(), items);
    }
}
