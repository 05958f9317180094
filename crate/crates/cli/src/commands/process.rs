//! `process`: one mesh in, a full robot bank out — repair, canonical
//! orientation, volume normalization, segmentation, assembly, and the
//! 30-variant export, plus the segmentation report and area-profile plot.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Args;
use quadforge::error::{Error, Result};
use quadforge::evo::DesignRepository;
use quadforge::mesh::{load_mesh, save_stl_binary, MeshFormat};
use quadforge::model::{assemble, elongate_legs, set_global_axis, urdf_xml, write_link_meshes};
use quadforge::pipeline::prepare_with;
use quadforge::segmentation::{segment, Axis, SegmentationReport};
use serde::Serialize;

#[derive(Args)]
pub struct ProcessArgs {
    /// Input mesh (.stl or .obj).
    pub mesh: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "process_out")]
    pub out: PathBuf,
    /// Bank/species tag; defaults to the mesh file stem.
    #[arg(long)]
    pub source_id: Option<String>,
}

#[derive(Serialize)]
struct BankManifest {
    source_id: String,
    variants: Vec<VariantEntry>,
    dropped: Vec<String>,
}

#[derive(Serialize)]
struct VariantEntry {
    id: String,
    scale_index: u8,
    axis: String,
    urdf: String,
    mesh_dir: String,
}

pub fn run(config: Option<&Path>, args: ProcessArgs) -> Result<ExitCode> {
    let cfg = super::load_config(config)?;
    let source_id = args.source_id.clone().unwrap_or_else(|| {
        args.mesh
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "design".into())
    });

    let format = MeshFormat::from_path(&args.mesh)?;
    let raw = load_mesh(&args.mesh, format, cfg.ingestion.units_scale)?;
    let (mesh, prep_report) = prepare_with(&raw, &cfg.ingestion)?;
    let (partition, seg_report) = segment(&mesh, &cfg.segmentation)?;
    let model = assemble(&partition, &cfg.electronics, &cfg.assembly)?;

    std::fs::create_dir_all(&args.out)?;
    save_stl_binary(&mesh, &args.out.join("canonical.stl"))?;
    std::fs::write(
        args.out.join("prepare_report.json"),
        serde_json::to_string_pretty(&prep_report)?,
    )?;
    std::fs::write(
        args.out.join("segmentation_report.json"),
        serde_json::to_string_pretty(&seg_report)?,
    )?;
    std::fs::write(args.out.join("area_profile.svg"), area_profile_svg(&seg_report))?;

    // Design repository prototypes for the evolution loop.
    let mut repo = DesignRepository::default();
    repo.ingest_partition(&source_id, &partition)?;
    repo.save_dir(&args.out.join("repository"))?;

    // Variant bank: geometry is shared per scale index; URDFs differ only
    // in joint axes.
    let bank_dir = args.out.join("bank");
    std::fs::create_dir_all(&bank_dir)?;
    let mut manifest = BankManifest {
        source_id: source_id.clone(),
        variants: Vec::new(),
        dropped: Vec::new(),
    };
    for scale_index in 0u8..10 {
        let scaled = elongate_legs(&model, scale_index)?;
        let mesh_dir_rel = format!("meshes/s{scale_index}");
        write_link_meshes(&scaled, &bank_dir.join(&mesh_dir_rel))?;
        for axis in Axis::ALL {
            let mut variant = scaled.clone();
            variant.name = format!("{source_id}_s{scale_index}_{}", axis.name());
            set_global_axis(&mut variant, axis);
            let urdf_rel = format!("variant_s{scale_index}_{}.urdf", axis.name());
            let xml = urdf_xml(&variant, &|link| format!("{mesh_dir_rel}/{link}.stl"));
            std::fs::write(bank_dir.join(&urdf_rel), xml)?;
            manifest.variants.push(VariantEntry {
                id: variant.name.clone(),
                scale_index,
                axis: axis.name().into(),
                urdf: urdf_rel,
                mesh_dir: mesh_dir_rel.clone(),
            });
        }
    }
    std::fs::write(
        bank_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;

    println!(
        "{source_id}: {} variants ({} links, {} joints each) -> {}",
        manifest.variants.len(),
        model.links.len(),
        model.joints.len(),
        args.out.display()
    );
    super::ok()
}

/// Loads the variant labels of a processed bank directory.
pub fn load_bank_labels(dir: &Path) -> Result<(String, Vec<(u8, Axis)>)> {
    #[derive(serde::Deserialize)]
    struct Manifest {
        source_id: String,
        variants: Vec<Entry>,
    }
    #[derive(serde::Deserialize)]
    struct Entry {
        scale_index: u8,
        axis: String,
    }
    let path = dir.join("bank").join("manifest.json");
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(&path).map_err(
        |e| Error::Config(format!("no bank manifest at {}: {e}", path.display())),
    )?)?;
    let labels = manifest
        .variants
        .iter()
        .map(|v| {
            Axis::parse(&v.axis)
                .map(|a| (v.scale_index, a))
                .ok_or_else(|| Error::Config(format!("bad axis {:?} in manifest", v.axis)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest.source_id, labels))
}

/// Longitudinal area profile as an SVG: bar heat strip plus the chosen
/// separation coordinates.
fn area_profile_svg(report: &SegmentationReport) -> String {
    let scan = &report.scan;
    let (w, h, margin) = (720.0, 260.0, 40.0);
    let max_area = scan.areas.iter().copied().fold(1e-12, f64::max);
    let n = scan.ys.len().max(2);
    let x = |i: usize| margin + (w - 2.0 * margin) * i as f64 / (n - 1) as f64;
    let bar_w = ((w - 2.0 * margin) / n as f64).max(1.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    for (i, &a) in scan.areas.iter().enumerate() {
        let t = (a / max_area).clamp(0.0, 1.0);
        let height = (h - 2.0 * margin) * t;
        let hue = 240.0 - 240.0 * t;
        let _ = writeln!(
            svg,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.2}\" height=\"{:.1}\" fill=\"hsl({hue:.0},80%,50%)\"/>",
            x(i) - bar_w / 2.0,
            h - margin - height,
            bar_w,
            height.max(0.5)
        );
    }
    for sign in [-1.0, 1.0] {
        let yc = sign * scan.plane_y;
        if let Some(i) = scan
            .ys
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - yc).abs().total_cmp(&(b.1 - yc).abs()))
            .map(|(i, _)| i)
        {
            let _ = writeln!(
                svg,
                "<line x1=\"{0:.1}\" y1=\"{margin}\" x2=\"{0:.1}\" y2=\"{1:.1}\" stroke=\"black\" stroke-dasharray=\"4,3\"/>",
                x(i),
                h - margin
            );
        }
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">longitudinal slice coordinate (separation planes dashed)</text>",
        w / 2.0,
        h - 10.0
    );
    let _ = writeln!(svg, "</svg>");
    svg
}
