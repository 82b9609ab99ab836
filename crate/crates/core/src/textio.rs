//! Plain-text measure files.
//!
//! Line-oriented, whitespace-separated, `#` starts a comment. The dimension
//! tag comes first, then the domain, then one record per carrier:
//!
//! ```text
//! dim 2
//! domain 0 0 1 1              # lo coords, then hi coords
//! atom 0.5 0.5 -1.0           # N coordinates, then the mass
//! curve -2.0 2 0.2 0.2 0.8 0.8  # density, point count, then the points
//! density const 2.0
//! density affine 1.0 0.0 -0.5 # N gradient components, then the offset
//! density sinsin 19.739
//! density samples 2 2 0 0 0 0 1 0 0 0 0
//! density scaled -1.0 const 2.0
//! density pospart affine 1.0 0.0 -0.5
//! ```

use crate::error::{Error, Result};
use crate::geometry::{BoxN, Point};
use crate::measure::{Density, Measure};

pub fn parse_measure(text: &str) -> Result<Measure> {
    let mut dim: Option<u8> = None;
    let mut domain: Option<BoxN> = None;
    let mut measure: Option<Measure> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        let err = |msg: &str| Error::Parse(format!("line {}: {}", lineno + 1, msg));
        match head {
            "dim" => {
                if measure.is_some() || dim.is_some() {
                    return Err(err("dim must appear once, before all records"));
                }
                let d: u8 = next_num(&mut tokens).ok_or_else(|| err("missing dimension"))? as u8;
                if d != 2 && d != 3 {
                    return Err(err("dimension must be 2 or 3"));
                }
                dim = Some(d);
            }
            "domain" => {
                if measure.is_some() || domain.is_some() {
                    return Err(err("domain must appear once, before all records"));
                }
                let d = dim.ok_or_else(|| err("dim must come before domain"))?;
                let nd = d as usize;
                let mut lo = [0.0; 3];
                let mut hi = [0.0; 3];
                for item in lo.iter_mut().take(nd) {
                    *item = next_num(&mut tokens).ok_or_else(|| err("domain needs 2N numbers"))?;
                }
                for item in hi.iter_mut().take(nd) {
                    *item = next_num(&mut tokens).ok_or_else(|| err("domain needs 2N numbers"))?;
                }
                domain = Some(BoxN::new(lo, hi, d)?);
            }
            "atom" | "curve" | "density" => {
                if measure.is_none() {
                    let d = dim.ok_or_else(|| err("dim must come before records"))?;
                    let dom = domain.ok_or_else(|| err("domain must come before records"))?;
                    measure = Some(Measure::new(d, dom)?);
                }
                let d = dim.unwrap();
                let m = measure.take().unwrap();
                let m = match head {
                    "atom" => {
                        let p = next_point(&mut tokens, d).ok_or_else(|| err("bad atom"))?;
                        let mass = next_num(&mut tokens).ok_or_else(|| err("atom needs a mass"))?;
                        m.with_atom(p, mass)?
                    }
                    "curve" => {
                        let density =
                            next_num(&mut tokens).ok_or_else(|| err("curve needs a density"))?;
                        let npts = next_num(&mut tokens).ok_or_else(|| err("curve needs a count"))?
                            as usize;
                        let mut pts = Vec::with_capacity(npts);
                        for _ in 0..npts {
                            pts.push(
                                next_point(&mut tokens, d).ok_or_else(|| err("bad curve point"))?,
                            );
                        }
                        m.with_curve(pts, density)?
                    }
                    _ => {
                        let dens = parse_density(&mut tokens, d)
                            .ok_or_else(|| err("bad density record"))?;
                        m.with_density(dens)?
                    }
                };
                if tokens.next().is_some() {
                    return Err(err("trailing tokens"));
                }
                measure = Some(m);
            }
            other => return Err(err(&format!("unknown record {other:?}"))),
        }
    }
    match (measure, dim, domain) {
        (Some(m), _, _) => Ok(m),
        (None, Some(d), Some(dom)) => Measure::new(d, dom),
        _ => Err(Error::Parse("measure file needs dim and domain".into())),
    }
}

fn next_num<'a, I: Iterator<Item = &'a str>>(tokens: &mut I) -> Option<f64> {
    tokens.next()?.parse().ok()
}

fn next_point<'a, I: Iterator<Item = &'a str>>(tokens: &mut I, dim: u8) -> Option<Point> {
    let mut p = [0.0; 3];
    for item in p.iter_mut().take(dim as usize) {
        *item = next_num(tokens)?;
    }
    Some(p)
}

fn parse_density<'a, I: Iterator<Item = &'a str>>(tokens: &mut I, dim: u8) -> Option<Density> {
    match tokens.next()? {
        "const" => Some(Density::Const(next_num(tokens)?)),
        "affine" => {
            let a = next_point(tokens, dim)?;
            let c = next_num(tokens)?;
            Some(Density::Affine { a, c })
        }
        "sinsin" => Some(Density::SinSin {
            amp: next_num(tokens)?,
        }),
        "samples" => {
            let nx = next_num(tokens)? as usize;
            let ny = next_num(tokens)? as usize;
            let mut values = Vec::with_capacity((nx + 1) * (ny + 1));
            for _ in 0..(nx + 1) * (ny + 1) {
                values.push(next_num(tokens)?);
            }
            Some(Density::Samples { nx, ny, values })
        }
        "scaled" => {
            let s = next_num(tokens)?;
            Some(Density::Scaled(s, Box::new(parse_density(tokens, dim)?)))
        }
        "pospart" => Some(Density::PosPart(Box::new(parse_density(tokens, dim)?))),
        "negpart" => Some(Density::NegPart(Box::new(parse_density(tokens, dim)?))),
        "sum" => {
            let k = next_num(tokens)? as usize;
            let mut terms = Vec::with_capacity(k);
            for _ in 0..k {
                terms.push(parse_density(tokens, dim)?);
            }
            Some(Density::Sum(terms))
        }
        _ => None,
    }
}

pub fn write_measure(m: &Measure) -> String {
    let mut out = String::new();
    let d = m.dim();
    let nd = d as usize;
    out.push_str(&format!("dim {d}\n"));
    out.push_str("domain");
    for k in 0..nd {
        out.push_str(&format!(" {}", fmt(m.domain().lo[k])));
    }
    for k in 0..nd {
        out.push_str(&format!(" {}", fmt(m.domain().hi[k])));
    }
    out.push('\n');
    for a in m.atoms() {
        out.push_str("atom");
        for k in 0..nd {
            out.push_str(&format!(" {}", fmt(a.location[k])));
        }
        out.push_str(&format!(" {}\n", fmt(a.mass)));
    }
    for c in m.curves() {
        out.push_str(&format!(
            "curve {} {}",
            fmt(c.linear_density),
            c.polyline.len()
        ));
        for p in &c.polyline {
            for k in 0..nd {
                out.push_str(&format!(" {}", fmt(p[k])));
            }
        }
        out.push('\n');
    }
    for dens in m.densities() {
        out.push_str("density ");
        write_density(&mut out, dens, nd);
        out.push('\n');
    }
    out
}

fn write_density(out: &mut String, d: &Density, nd: usize) {
    match d {
        Density::Const(c) => out.push_str(&format!("const {}", fmt(*c))),
        Density::Affine { a, c } => {
            out.push_str("affine");
            for k in 0..nd {
                out.push_str(&format!(" {}", fmt(a[k])));
            }
            out.push_str(&format!(" {}", fmt(*c)));
        }
        Density::SinSin { amp } => out.push_str(&format!("sinsin {}", fmt(*amp))),
        Density::Samples { nx, ny, values } => {
            out.push_str(&format!("samples {nx} {ny}"));
            for v in values {
                out.push_str(&format!(" {}", fmt(*v)));
            }
        }
        Density::Scaled(s, inner) => {
            out.push_str(&format!("scaled {} ", fmt(*s)));
            write_density(out, inner, nd);
        }
        Density::Sum(terms) => {
            out.push_str(&format!("sum {}", terms.len()));
            for t in terms {
                out.push(' ');
                write_density(out, t, nd);
            }
        }
        Density::PosPart(inner) => {
            out.push_str("pospart ");
            write_density(out, inner, nd);
        }
        Density::NegPart(inner) => {
            out.push_str("negpart ");
            write_density(out, inner, nd);
        }
    }
}

fn fmt(v: f64) -> String {
    // shortest representation that round-trips
    format!("{v}")
}
