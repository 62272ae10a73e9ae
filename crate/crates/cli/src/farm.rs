use std::str::FromStr;

use linkspam::synthcorpus::{FarmKind, FarmSpec};

/// A `--farm` value such as `clique:10:2:3` or `bipartite:5:3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarmArg(pub FarmSpec);

fn number(field: &str, what: &str) -> Result<usize, String> {
    field.parse().map_err(|_| format!("bad {what} `{field}`"))
}

impl FromStr for FarmArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let (kind, rest) = match parts.as_slice() {
            ["clique", n, rest @ ..] => (
                FarmKind::Clique {
                    domains: number(n, "domain count")?,
                },
                rest,
            ),
            ["bipartite", h, a, rest @ ..] => (
                FarmKind::Bipartite {
                    hubs: number(h, "hub count")?,
                    authorities: number(a, "authority count")?,
                },
                rest,
            ),
            _ => {
                return Err(format!(
                    "expected clique:N[:PAGES[:BOOST]] or bipartite:H:A[:PAGES[:BOOST]], got `{s}`"
                ))
            }
        };
        let (pages, boost) = match rest {
            [] => (1, 0),
            [p] => (number(p, "page count")?, 0),
            [p, b] => (number(p, "page count")?, number(b, "boost count")?),
            _ => return Err(format!("too many fields in `{s}`")),
        };
        Ok(FarmArg(FarmSpec {
            kind,
            pages_per_domain: pages,
            boost_edges: boost,
        }))
    }
}
