//! Flat binary container and CSV export for fields.
//!
//! Layout (little-endian): magic `HSFD`, u32 version, u64 n, f64 L, u64 N, u8 stagger,
//! u8 kind (0 full, 1 half), u8 bc (0 none, 1 Dirichlet, 2 Neumann), u64 count, then
//! `count` f64 samples in storage order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{half_point, Bc, GridSpec, HalfField, SampledField, Samples};

const MAGIC: &[u8; 4] = b"HSFD";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum StoredField {
    Full(SampledField),
    Half(HalfField),
}

impl StoredField {
    pub fn grid(&self) -> &GridSpec {
        match self {
            StoredField::Full(f) => f.grid(),
            StoredField::Half(f) => f.grid(),
        }
    }
}

fn bc_code(bc: Bc) -> u8 {
    match bc {
        Bc::None => 0,
        Bc::Dirichlet => 1,
        Bc::Neumann => 2,
    }
}

pub fn write_field(w: &mut impl Write, field: &StoredField) -> Result<()> {
    let (grid, values, kind, bc) = match field {
        StoredField::Full(f) => (f.grid(), f.values(), 0u8, Bc::None),
        StoredField::Half(f) => (f.grid(), f.values(), 1u8, f.bc()),
    };
    let mut buf = Vec::with_capacity(48 + 8 * values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(grid.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&grid.half_width().to_le_bytes());
    buf.extend_from_slice(&(grid.points() as u64).to_le_bytes());
    buf.push(grid.stagger() as u8);
    buf.push(kind);
    buf.push(bc_code(bc));
    buf.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.at + K;
        let slice = self
            .bytes
            .get(self.at..end)
            .ok_or_else(|| Error::Format("truncated header or payload".into()))?;
        self.at = end;
        Ok(slice.try_into().expect("slice length checked"))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn read_field(r: &mut impl Read) -> Result<StoredField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut c = Cursor { bytes: &bytes, at: 0 };
    if &c.take::<4>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = c.u64()? as usize;
    let half_width = c.f64()?;
    let points = c.u64()? as usize;
    let stagger = match c.u8()? {
        0 => false,
        1 => true,
        b => return Err(Error::Format(format!("bad stagger byte {b}"))),
    };
    let kind = c.u8()?;
    let bc = match c.u8()? {
        0 => Bc::None,
        1 => Bc::Dirichlet,
        2 => Bc::Neumann,
        b => return Err(Error::Format(format!("bad boundary tag {b}"))),
    };
    let count = c.u64()? as usize;
    let grid = GridSpec::new(dim, half_width, points, stagger)?;
    let expected = match kind {
        0 => grid.len(),
        1 => grid.half_len(),
        k => return Err(Error::Format(format!("bad field kind {k}"))),
    };
    if count != expected {
        return Err(Error::Format(format!("sample count {count}, grid needs {expected}")));
    }
    let values = (0..count).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    if c.at != bytes.len() {
        return Err(Error::Format("trailing bytes".into()));
    }
    match kind {
        0 => Ok(StoredField::Full(SampledField::from_values(grid, values)?)),
        _ => Ok(StoredField::Half(HalfField::from_values(grid, values, bc)?)),
    }
}

pub fn save(path: &Path, field: &StoredField) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field(&mut file, field)?;
    file.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<StoredField> {
    read_field(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

/// One row per sample: axis indices, coordinates, value.
pub fn write_csv(w: &mut impl Write, field: &StoredField) -> Result<()> {
    let grid = *field.grid();
    let dim = grid.dim();
    let header: Vec<String> = (0..dim)
        .map(|a| format!("k{a}"))
        .chain((0..dim).map(|a| format!("x{a}")))
        .chain(std::iter::once("value".to_string()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    let write_row = |w: &mut dyn Write, k: [usize; 3], v: f64| -> std::io::Result<()> {
        let mut row: Vec<String> = k[..dim].iter().map(|i| i.to_string()).collect();
        row.extend((0..dim).map(|a| grid.coord(a, k[a]).to_string()));
        row.push(v.to_string());
        writeln!(w, "{}", row.join(","))
    };
    match field {
        StoredField::Full(f) => {
            for (i, v) in f.values().iter().enumerate() {
                write_row(w, grid.unravel(i), *v)?;
            }
        }
        StoredField::Half(f) => {
            let half = grid.points() / 2;
            for (i, v) in f.values().iter().enumerate() {
                debug_assert!(half_point(&grid, i)[dim - 1] > 0.0);
                write_row(w, grid.unravel((i / half) * grid.points() + half + i % half), *v)?;
            }
        }
    }
    Ok(())
}
