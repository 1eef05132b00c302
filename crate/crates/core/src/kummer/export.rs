use serde::{Deserialize, Serialize};

use crate::sphere::{Resolution, SymTensorField2};
use crate::Result;

use super::{principal_intensities, RadialHypersurface};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorExportPoint {
    /// Grid index of the point.
    pub index: usize,
    /// Chart coordinates in radians.
    pub chart: Vec<f64>,
    /// Chart components `T_ij`, row-major.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of the orthonormal-frame matrix, ascending.
    pub frame_eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorExport {
    pub dimension: usize,
    pub grid: Resolution,
    pub points: Vec<TensorExportPoint>,
}

pub fn tensor_json(t: &SymTensorField2) -> TensorExport {
    let grid = t.grid();
    let n = grid.dimension().n();
    let frame = t.frame();
    let points = t
        .values()
        .iter()
        .zip(&frame)
        .enumerate()
        .map(|(k, (v, f))| {
            let index = t.grid_index(k);
            TensorExportPoint {
                index,
                chart: grid.point(index).u[..n].to_vec(),
                components: (0..n).map(|i| v.a[i][..n].to_vec()).collect(),
                frame_eigenvalues: f.eigen().values[..n].to_vec(),
            }
        })
        .collect();
    TensorExport { dimension: n, grid: grid.resolution(), points }
}

/// CSV table `point, chart coordinates, rho, S_1..S_n, lambda_1..lambda_n`.
pub fn spectrum_csv(r: &RadialHypersurface) -> Result<String> {
    let n = r.dimension().n();
    let spec = principal_intensities(r);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["point".to_string()];
    header.extend(if n == 1 { vec!["theta".to_string()] } else { vec!["colatitude".into(), "longitude".into()] });
    header.push("rho".into());
    header.extend((1..=n).map(|m| format!("S{m}")));
    header.extend((1..=n).map(|m| format!("lambda{m}")));
    w.write_record(&header).map_err(csv_err)?;
    for k in 0..r.len() {
        let index = r.grid_index(k);
        let u = r.grid().point(index).u;
        let mut row = vec![index.to_string()];
        row.extend(u[..n].iter().map(|v| v.to_string()));
        row.push(r.jets()[k].rho.to_string());
        row.extend(spec.s[k].iter().map(|v| v.to_string()));
        row.extend(spec.lambdas[k].iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub(crate) fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}
