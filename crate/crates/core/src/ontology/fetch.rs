//! Minimal crawler that turns concept web pages into the JSONL dump format.
//!
//! Only the handful of sections mining needs are extracted: Definition,
//! Explanatory Note, Generated Description, Synonym(s), Direct subclasses and
//! Instances. A section is the content between a heading-like element
//! (`h1`..`h6`, `dt`, `th`) whose text names it and the next such element.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use regex::Regex;

use super::OntologyRecord;
use crate::error::{Error, Result};
use crate::tags::Tag;

/// Anything that can return the HTML of a page.
pub trait PageSource {
    fn get(&mut self, url: &str) -> Result<String>;
}

/// Blocking HTTP source that waits at least `min_interval` between requests.
pub struct HttpSource {
    agent: ureq::Agent,
    min_interval: Duration,
    last: Option<Instant>,
}

impl HttpSource {
    pub const MIN_INTERVAL: Duration = Duration::from_millis(500);

    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpSource {
            agent,
            min_interval: Self::MIN_INTERVAL,
            last: None,
        }
    }

    /// Requests are never closer together than [`Self::MIN_INTERVAL`].
    pub fn with_interval(mut self, interval: Duration) -> Self {
        self.min_interval = interval.max(Self::MIN_INTERVAL);
        self
    }
}

impl PageSource for HttpSource {
    fn get(&mut self, url: &str) -> Result<String> {
        if let Some(last) = self.last {
            let elapsed = last.elapsed();
            if elapsed < self.min_interval {
                std::thread::sleep(self.min_interval - elapsed);
            }
        }
        self.last = Some(Instant::now());
        let fail = |e: ureq::Error| Error::Fetch {
            url: url.to_string(),
            message: e.to_string(),
        };
        let mut response = self.agent.get(url).call().map_err(fail)?;
        response.body_mut().read_to_string().map_err(fail)
    }
}

#[derive(Clone, Debug)]
pub struct SeedPage {
    pub tag: Tag,
    pub url: String,
}

#[derive(Clone, Copy, Debug)]
pub struct FetchOptions {
    pub max_depth: usize,
    pub expand_instances: bool,
}

impl Default for FetchOptions {
    fn default() -> Self {
        FetchOptions {
            max_depth: 2,
            expand_instances: false,
        }
    }
}

/// Crawls from the seed pages and appends one JSONL record per page to `out`.
///
/// Pages already present in `out` are not requested again, so an interrupted
/// crawl resumes where it stopped. Records are flushed as they are fetched.
pub fn fetch_pages(
    source: &mut dyn PageSource,
    seeds: &[SeedPage],
    out: &Path,
    opts: FetchOptions,
) -> Result<PathBuf> {
    let mut known: HashMap<String, OntologyRecord> = HashMap::new();
    if out.exists() {
        let dump = super::load_dump(out)?;
        for r in dump.records {
            known.insert(r.iri.clone(), r);
        }
    }

    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .map_err(|e| Error::io(out, e))?;

    let mut queue: VecDeque<(String, usize, Option<Tag>)> =
        seeds.iter().map(|s| (s.url.clone(), 0, Some(s.tag))).collect();
    let mut visited = HashSet::new();
    while let Some((url, depth, seed)) = queue.pop_front() {
        if !visited.insert(url.clone()) {
            continue;
        }
        let record = match known.get(&url) {
            Some(r) => r.clone(),
            None => {
                let html = source.get(&url)?;
                let mut record = parse_page(&url, &html);
                if let Some(tag) = seed {
                    if !record.label.eq_ignore_ascii_case(tag.name()) {
                        log::info!("seed page {url} labelled `{}`, using `{tag}`", record.label);
                        record.label = tag.name().to_string();
                    }
                }
                if record.definition.is_none()
                    && record.explanatory_note.is_none()
                    && record.generated_description.is_none()
                    && record.synonyms.is_empty()
                {
                    log::warn!("{url}: no definition, note, description or synonyms found");
                }
                let line = serde_json::to_string(&record)?;
                writeln!(file, "{line}")
                    .and_then(|_| file.flush())
                    .map_err(|e| Error::io(out, e))?;
                known.insert(url.clone(), record.clone());
                record
            }
        };
        if depth < opts.max_depth {
            let links = record.subclasses.iter().chain(
                opts.expand_instances
                    .then_some(record.instances.iter())
                    .into_iter()
                    .flatten(),
            );
            for link in links {
                queue.push_back((link.clone(), depth + 1, None));
            }
        }
    }
    Ok(out.to_path_buf())
}

fn heading_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?is)<(h[1-6]|dt|th)\b[^>]*>(.*?)</(?:h[1-6]|dt|th)\s*>").unwrap()
    })
}

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<[^>]*>").unwrap())
}

fn href_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)href\s*=\s*["']([^"']+)["']"#).unwrap())
}

fn item_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<li\b[^>]*>(.*?)</li\s*>").unwrap())
}

fn title_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?is)<title\b[^>]*>(.*?)</title\s*>").unwrap())
}

fn strip_html(fragment: &str) -> String {
    let text = tag_re().replace_all(fragment, " ");
    let text = text
        .replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&");
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn resolve_link(page_url: &str, href: &str) -> String {
    if href.contains("://") {
        return href.to_string();
    }
    let scheme_end = page_url.find("://").map(|i| i + 3).unwrap_or(0);
    if let Some(rest) = href.strip_prefix('/') {
        let host_end = page_url[scheme_end..]
            .find('/')
            .map(|i| scheme_end + i)
            .unwrap_or(page_url.len());
        return format!("{}/{}", &page_url[..host_end], rest);
    }
    let dir_end = page_url[scheme_end..]
        .rfind('/')
        .map(|i| scheme_end + i + 1)
        .unwrap_or(page_url.len());
    let mut base = page_url[..dir_end].to_string();
    if !base.ends_with('/') {
        base.push('/');
    }
    base + href
}

/// Extracts a record from one concept page; `url` becomes the record's iri.
pub fn parse_page(url: &str, html: &str) -> OntologyRecord {
    let mut record = OntologyRecord {
        iri: url.to_string(),
        ..Default::default()
    };

    let headings: Vec<_> = heading_re().captures_iter(html).collect();
    for (i, cap) in headings.iter().enumerate() {
        let whole = cap.get(0).unwrap();
        let element = cap[1].to_ascii_lowercase();
        let name = strip_html(&cap[2]).to_lowercase();
        let name = name.trim_end_matches(':').trim();
        let end = headings
            .get(i + 1)
            .map(|c| c.get(0).unwrap().start())
            .unwrap_or(html.len());
        let body = &html[whole.end()..end];

        if element == "h1" && record.label.is_empty() {
            record.label = strip_html(&cap[2]);
            continue;
        }
        let text = || Some(strip_html(body)).filter(|t| !t.is_empty());
        let links = || {
            href_re()
                .captures_iter(body)
                .map(|c| resolve_link(url, &c[1]))
                .collect::<Vec<_>>()
        };
        match name {
            "definition" => record.definition = text(),
            "explanatory note" => record.explanatory_note = text(),
            "generated description" => record.generated_description = text(),
            "synonym" | "synonyms" | "synonym(s)" => {
                let items: Vec<String> = item_re()
                    .captures_iter(body)
                    .map(|c| strip_html(&c[1]))
                    .filter(|s| !s.is_empty())
                    .collect();
                record.synonyms = if items.is_empty() {
                    text().map(|t| vec![t]).unwrap_or_default()
                } else {
                    items
                };
            }
            "direct subclasses" => record.subclasses = links(),
            "instances" => record.instances = links(),
            _ => {}
        }
    }
    if record.label.is_empty() {
        if let Some(c) = title_re().captures(html) {
            record.label = strip_html(&c[1]);
        }
    }
    record
}

#[cfg(test)]
mod tests {
    use super::*;

    struct MapSource {
        pages: HashMap<String, String>,
        requests: Vec<String>,
    }

    impl PageSource for MapSource {
        fn get(&mut self, url: &str) -> Result<String> {
            self.requests.push(url.to_string());
            self.pages.get(url).cloned().ok_or_else(|| Error::Fetch {
                url: url.to_string(),
                message: "404".into(),
            })
        }
    }

    fn page(label: &str, def: &str, subs: &[&str]) -> String {
        let links: String = subs.iter().map(|s| format!("<li><a href=\"{s}\">x</a></li>")).collect();
        format!(
            "<html><h1>{label}</h1><dl><dt>Definition</dt><dd>{def}</dd>\
             <dt>Direct subclasses</dt><dd><ul>{links}</ul></dd></dl></html>"
        )
    }

    fn site() -> MapSource {
        let mut pages = HashMap::new();
        pages.insert("http://h/o/Bond".into(), page("Bond", "a debt instrument", &["CallableBond"]));
        pages.insert("http://h/o/CallableBond".into(), page("Callable Bond", "redeemable early", &["/o/Deep"]));
        pages.insert("http://h/o/Deep".into(), page("Deep", "grandchild", &["Deeper"]));
        pages.insert("http://h/o/Deeper".into(), page("Deeper", "too deep", &[]));
        MapSource { pages, requests: vec![] }
    }

    fn seeds() -> Vec<SeedPage> {
        vec![SeedPage { tag: Tag::from_name("Bonds").unwrap(), url: "http://h/o/Bond".into() }]
    }

    #[test]
    fn page_with_only_definition() {
        let html = "<html><title>Swap</title><h2>Definition:</h2><p>an exchange of &amp; flows</p></html>";
        let r = parse_page("http://x/swap", html);
        assert_eq!(r.label, "Swap");
        assert_eq!(r.definition.as_deref(), Some("an exchange of & flows"));
        assert!(r.explanatory_note.is_none());
        assert!(r.generated_description.is_none());
        assert!(r.synonyms.is_empty());
    }

    #[test]
    fn parses_all_sections() {
        let html = "<h1>Bond</h1><table><tr><th>Explanatory Note</th><td>note</td></tr>\
                    <tr><th>Generated Description</th><td>gen</td></tr>\
                    <tr><th>Synonym(s)</th><td><ul><li>debt</li><li>obligation</li></ul></td></tr>\
                    <tr><th>Instances</th><td><a href='http://z/i1'>i1</a></td></tr></table>";
        let r = parse_page("http://h/o/Bond", html);
        assert_eq!(r.explanatory_note.as_deref(), Some("note"));
        assert_eq!(r.generated_description.as_deref(), Some("gen"));
        assert_eq!(r.synonyms, vec!["debt", "obligation"]);
        assert_eq!(r.instances, vec!["http://z/i1"]);
    }

    #[test]
    fn crawl_is_depth_limited_and_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("dump.jsonl");
        let mut src = site();
        fetch_pages(&mut src, &seeds(), &out, FetchOptions::default()).unwrap();
        assert_eq!(src.requests.len(), 3);
        let dump = crate::ontology::load_dump(&out).unwrap();
        assert_eq!(dump.records[0].label, "Bonds");
        assert_eq!(dump.records[2].iri, "http://h/o/Deep");

        let before = std::fs::read(&out).unwrap();
        let mut again = site();
        fetch_pages(&mut again, &seeds(), &out, FetchOptions::default()).unwrap();
        assert!(again.requests.is_empty());
        assert_eq!(std::fs::read(&out).unwrap(), before);
    }

    #[test]
    fn failure_keeps_partial_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("dump.jsonl");
        let mut src = site();
        src.pages.remove("http://h/o/Deep");
        assert!(fetch_pages(&mut src, &seeds(), &out, FetchOptions::default()).is_err());
        assert_eq!(crate::ontology::load_dump(&out).unwrap().records.len(), 2);

        let mut resumed = site();
        fetch_pages(&mut resumed, &seeds(), &out, FetchOptions::default()).unwrap();
        assert_eq!(resumed.requests, vec!["http://h/o/Deep"]);
    }

    #[test]
    fn unreachable_host_errors_without_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("dump.jsonl");
        let mut http = HttpSource::new(Duration::from_secs(2));
        let seeds = vec![SeedPage { tag: Tag::from_name("Bonds").unwrap(), url: "http://127.0.0.1:9/x".into() }];
        let err = fetch_pages(&mut http, &seeds, &out, FetchOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Fetch { .. }));
        assert_eq!(std::fs::metadata(&out).unwrap().len(), 0);
    }

    #[test]
    fn relative_links() {
        assert_eq!(resolve_link("http://h/a/b", "c"), "http://h/a/c");
        assert_eq!(resolve_link("http://h/a/b", "/c"), "http://h/c");
        assert_eq!(resolve_link("http://h/a/b", "https://q/c"), "https://q/c");
    }
}
