//! Parsers for texture-source and geometry arguments.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use texseg::mosaic::{KernelSizes, KernelTexture, RegionGeometry, TextureSource};
use texseg::synth::{KernelSize, MAModel, MaDirection};

/// `ma1`..`ma4`, `kernel:<v>` (isotropic), `kernel:<a>:<b>:<c>:<d>`, or `image:<path>`.
pub fn texture_source(
    spec: &str,
    ma_half_width: usize,
    kernel_scale: Option<f64>,
) -> Result<TextureSource> {
    if let Some(number) = spec.strip_prefix("ma") {
        let model: usize = number
            .parse()
            .map_err(|_| anyhow!("bad model '{spec}'; expected ma1..ma4"))?;
        let direction = MaDirection::from_model_number(model)
            .ok_or_else(|| anyhow!("bad model '{spec}'; expected ma1..ma4"))?;
        return Ok(TextureSource::Ma(MAModel::new(direction, ma_half_width)?));
    }
    if let Some(rest) = spec.strip_prefix("kernel:") {
        let parts = rest
            .split(':')
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| anyhow!("bad kernel size '{spec}'"))
            })
            .collect::<Result<Vec<_>>>()?;
        let size = match parts[..] {
            [v] => KernelSize::isotropic(v),
            [a, b, c, d] => KernelSize::new(a, b, c, d),
            _ => bail!("bad kernel size '{spec}'; expected kernel:<v> or kernel:<a>:<b>:<c>:<d>"),
        };
        if !size.is_spd() {
            bail!("kernel size in '{spec}' is not symmetric positive definite");
        }
        return Ok(TextureSource::Kernel(KernelTexture {
            sizes: KernelSizes::Constant(size),
            scale: kernel_scale,
        }));
    }
    if let Some(path) = spec.strip_prefix("image:") {
        return Ok(TextureSource::ImageFile(PathBuf::from(path)));
    }
    bail!("unknown texture '{spec}'; expected ma1..ma4, kernel:<v> or image:<path>")
}

/// `vsplit`, `hsplit`, `disk`, `quadrants`, or `mask:<path>`.
pub fn geometry(spec: &str) -> Result<RegionGeometry> {
    Ok(match spec {
        "vsplit" => RegionGeometry::VSplit,
        "hsplit" => RegionGeometry::HSplit,
        "disk" => RegionGeometry::disk(),
        "quadrants" => RegionGeometry::Quadrants,
        _ => match spec.strip_prefix("mask:") {
            Some(path) => RegionGeometry::MaskFile(PathBuf::from(path)),
            None => bail!("unknown geometry '{spec}'; expected vsplit, hsplit, disk, quadrants or mask:<path>"),
        },
    })
}

/// `ma<k>` to a model.
pub fn ma_model(spec: &str, half_width: usize) -> Result<MAModel> {
    match texture_source(spec, half_width, None)? {
        TextureSource::Ma(m) => Ok(m),
        _ => bail!("'{spec}' is not a moving-average model (ma1..ma4)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sources() {
        assert!(matches!(
            texture_source("ma3", 2, None).unwrap(),
            TextureSource::Ma(_)
        ));
        assert!(matches!(
            texture_source("kernel:9", 2, Some(3.0)).unwrap(),
            TextureSource::Kernel(_)
        ));
        assert!(matches!(
            texture_source("kernel:2:0.5:0.5:1", 2, None).unwrap(),
            TextureSource::Kernel(_)
        ));
        assert!(texture_source("kernel:1:2:3:4", 2, None).is_err());
        assert!(texture_source("ma5", 2, None).is_err());
        assert!(texture_source("gabor", 2, None).is_err());
        assert!(geometry("mask:x.pgm").is_ok());
        assert!(geometry("triangle").is_err());
    }
}
