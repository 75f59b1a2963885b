//! PLY point cloud files, ASCII and binary little-endian.
//!
//! The schema is a single `vertex` element with `float x/y/z`, optional
//! `float nx/ny/nz` and optional `uchar red/green/blue`. Positions and
//! normals are stored as 32-bit floats, so loading a file our writer
//! produced and saving it again is byte-identical.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cloud::NORMAL_TOL;
use crate::{Error, PointCloud, Real, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    X,
    Y,
    Z,
    Nx,
    Ny,
    Nz,
    Red,
    Green,
    Blue,
}

impl Field {
    fn parse(ty: &str, name: &str) -> Result<Field> {
        let field = match name {
            "x" => Field::X,
            "y" => Field::Y,
            "z" => Field::Z,
            "nx" => Field::Nx,
            "ny" => Field::Ny,
            "nz" => Field::Nz,
            "red" => Field::Red,
            "green" => Field::Green,
            "blue" => Field::Blue,
            other => return Err(Error::Parse(format!("unsupported property '{other}'"))),
        };
        let want_float = !matches!(field, Field::Red | Field::Green | Field::Blue);
        let ok = if want_float {
            matches!(ty, "float" | "float32")
        } else {
            matches!(ty, "uchar" | "uint8")
        };
        if !ok {
            return Err(Error::Parse(format!(
                "property '{name}' has unsupported type '{ty}'"
            )));
        }
        Ok(field)
    }

    fn byte_len(&self) -> usize {
        match self {
            Field::Red | Field::Green | Field::Blue => 1,
            _ => 4,
        }
    }
}

pub fn write_ply<R: Real>(cloud: &PointCloud<R>, path: &Path, format: PlyFormat) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_ply_to(cloud, &mut w, format)
}

pub fn write_ply_to<R: Real, W: Write>(
    cloud: &PointCloud<R>,
    w: &mut W,
    format: PlyFormat,
) -> Result<()> {
    let fmt_line = match format {
        PlyFormat::Ascii => "format ascii 1.0",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0",
    };
    write!(w, "ply\n{fmt_line}\nelement vertex {}\n", cloud.len())?;
    write!(w, "property float x\nproperty float y\nproperty float z\n")?;
    if cloud.has_normals() {
        write!(w, "property float nx\nproperty float ny\nproperty float nz\n")?;
    }
    if cloud.has_colors() {
        write!(w, "property uchar red\nproperty uchar green\nproperty uchar blue\n")?;
    }
    write!(w, "end_header\n")?;

    let to_f32 = |v: R| v.to_f64().unwrap() as f32;
    let to_u8 = |v: R| (v.to_f64().unwrap() * 255.0).round().clamp(0.0, 255.0) as u8;

    for i in 0..cloud.len() {
        let p = cloud.point(i);
        match format {
            PlyFormat::Ascii => {
                write!(w, "{} {} {}", to_f32(p.x), to_f32(p.y), to_f32(p.z))?;
                if let Some(ns) = cloud.normals() {
                    let n = ns[i];
                    write!(w, " {} {} {}", to_f32(n.x), to_f32(n.y), to_f32(n.z))?;
                }
                if let Some(cs) = cloud.colors() {
                    let c = cs[i];
                    write!(w, " {} {} {}", to_u8(c.x), to_u8(c.y), to_u8(c.z))?;
                }
                writeln!(w)?;
            }
            PlyFormat::BinaryLittleEndian => {
                for v in [p.x, p.y, p.z] {
                    w.write_all(&to_f32(v).to_le_bytes())?;
                }
                if let Some(ns) = cloud.normals() {
                    let n = ns[i];
                    for v in [n.x, n.y, n.z] {
                        w.write_all(&to_f32(v).to_le_bytes())?;
                    }
                }
                if let Some(cs) = cloud.colors() {
                    let c = cs[i];
                    w.write_all(&[to_u8(c.x), to_u8(c.y), to_u8(c.z)])?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_ply<R: Real>(path: &Path) -> Result<PointCloud<R>> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    read_ply_from(&mut r)
}

pub fn read_ply_from<R: Real, B: BufRead>(r: &mut B) -> Result<PointCloud<R>> {
    let mut line = Vec::new();
    let mut read_line = |r: &mut B| -> Result<String> {
        line.clear();
        let n = r.read_until(b'\n', &mut line)?;
        if n == 0 {
            return Err(Error::Parse("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&line).trim_end().to_string())
    };

    if read_line(r)? != "ply" {
        return Err(Error::Parse("missing 'ply' magic line".into()));
    }
    let format = match read_line(r)?.as_str() {
        "format ascii 1.0" => PlyFormat::Ascii,
        "format binary_little_endian 1.0" => PlyFormat::BinaryLittleEndian,
        other => return Err(Error::Parse(format!("unsupported format line '{other}'"))),
    };

    let mut count: Option<usize> = None;
    let mut fields: Vec<Field> = Vec::new();
    loop {
        let l = read_line(r)?;
        if l == "end_header" {
            break;
        }
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("comment") | Some("obj_info") => continue,
            Some("element") => {
                let name = tok.next().unwrap_or("");
                if name != "vertex" || count.is_some() {
                    return Err(Error::Parse(format!("unsupported element '{name}'")));
                }
                let n: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse("bad vertex count".into()))?;
                count = Some(n);
            }
            Some("property") => {
                if count.is_none() {
                    return Err(Error::Parse("property before any element".into()));
                }
                let ty = tok.next().unwrap_or("");
                if ty == "list" {
                    return Err(Error::Parse("list properties are unsupported".into()));
                }
                let name = tok.next().unwrap_or("");
                fields.push(Field::parse(ty, name)?);
            }
            _ => return Err(Error::Parse(format!("unrecognized header line '{l}'"))),
        }
    }

    let count = count.ok_or_else(|| Error::Parse("no vertex element".into()))?;
    for f in [Field::X, Field::Y, Field::Z] {
        if !fields.contains(&f) {
            return Err(Error::Parse("vertex is missing x/y/z".into()));
        }
    }
    let has_normals = fields.contains(&Field::Nx);
    if has_normals && !(fields.contains(&Field::Ny) && fields.contains(&Field::Nz)) {
        return Err(Error::Parse("incomplete normal triplet".into()));
    }
    let has_colors = fields.contains(&Field::Red);
    if has_colors && !(fields.contains(&Field::Green) && fields.contains(&Field::Blue)) {
        return Err(Error::Parse("incomplete color triplet".into()));
    }

    let mut xyz = vec![[0f32; 3]; count];
    let mut nrm = vec![[0f32; 3]; count];
    let mut rgb = vec![[0u8; 3]; count];

    match format {
        PlyFormat::Ascii => {
            let mut body = String::new();
            r.read_to_string(&mut body)?;
            let mut tokens = body.split_whitespace();
            for row in 0..count {
                for field in &fields {
                    let tok = tokens.next().ok_or_else(|| {
                        Error::Parse(format!("vertex data ends early at row {row}"))
                    })?;
                    store_token(field, tok, row, &mut xyz, &mut nrm, &mut rgb)?;
                }
            }
            if tokens.next().is_some() {
                return Err(Error::Parse("trailing data after vertices".into()));
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let stride: usize = fields.iter().map(Field::byte_len).sum();
            let mut body = Vec::new();
            r.read_to_end(&mut body)?;
            if body.len() != stride * count {
                return Err(Error::Parse(format!(
                    "binary body is {} bytes, expected {}",
                    body.len(),
                    stride * count
                )));
            }
            for (row, rec) in body.chunks_exact(stride).enumerate() {
                let mut off = 0;
                for field in &fields {
                    match field.byte_len() {
                        4 => {
                            let v = f32::from_le_bytes(rec[off..off + 4].try_into().unwrap());
                            store_f32(field, v, row, &mut xyz, &mut nrm)?;
                            off += 4;
                        }
                        _ => {
                            store_u8(field, rec[off], row, &mut rgb);
                            off += 1;
                        }
                    }
                }
            }
        }
    }

    let points: Vec<Vec3<R>> = xyz
        .iter()
        .map(|p| Vec3::new(R::c(p[0] as f64), R::c(p[1] as f64), R::c(p[2] as f64)))
        .collect();
    let mut cloud = PointCloud::from_points(points)
        .map_err(|e| Error::Parse(format!("bad vertex data: {e}")))?;

    if has_normals {
        let normals = nrm
            .iter()
            .map(|n| {
                let v = Vec3::new(R::c(n[0] as f64), R::c(n[1] as f64), R::c(n[2] as f64));
                let len = v.norm();
                if len == R::zero() {
                    Vec3::zeros()
                } else if (len - R::one()).abs() <= R::c(NORMAL_TOL) {
                    v
                } else {
                    v / len
                }
            })
            .collect();
        cloud
            .set_normals(normals)
            .map_err(|e| Error::Parse(format!("bad normal data: {e}")))?;
    }
    if has_colors {
        let colors = rgb
            .iter()
            .map(|c| {
                Vec3::new(
                    R::c(c[0] as f64 / 255.0),
                    R::c(c[1] as f64 / 255.0),
                    R::c(c[2] as f64 / 255.0),
                )
            })
            .collect();
        cloud
            .set_colors(colors)
            .map_err(|e| Error::Parse(format!("bad color data: {e}")))?;
    }
    Ok(cloud)
}

fn store_token(
    field: &Field,
    tok: &str,
    row: usize,
    xyz: &mut [[f32; 3]],
    nrm: &mut [[f32; 3]],
    rgb: &mut [[u8; 3]],
) -> Result<()> {
    match field {
        Field::Red | Field::Green | Field::Blue => {
            let v: u8 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad color value '{tok}'")))?;
            store_u8(field, v, row, rgb);
            Ok(())
        }
        _ => {
            let v: f32 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad float value '{tok}'")))?;
            store_f32(field, v, row, xyz, nrm)
        }
    }
}

fn store_f32(
    field: &Field,
    v: f32,
    row: usize,
    xyz: &mut [[f32; 3]],
    nrm: &mut [[f32; 3]],
) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite value in row {row}")));
    }
    match field {
        Field::X => xyz[row][0] = v,
        Field::Y => xyz[row][1] = v,
        Field::Z => xyz[row][2] = v,
        Field::Nx => nrm[row][0] = v,
        Field::Ny => nrm[row][1] = v,
        Field::Nz => nrm[row][2] = v,
        _ => unreachable!(),
    }
    Ok(())
}

fn store_u8(field: &Field, v: u8, row: usize, rgb: &mut [[u8; 3]]) {
    match field {
        Field::Red => rgb[row][0] = v,
        Field::Green => rgb[row][1] = v,
        Field::Blue => rgb[row][2] = v,
        _ => unreachable!(),
    }
}
