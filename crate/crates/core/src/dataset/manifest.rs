use std::fs;
use std::path::{Path, PathBuf};

use super::{DatasetError, Domain, FaceSample, Point, Roi};

pub const MANIFEST_HEADER: [&str; 11] = [
    "subject_id", "path", "domain", "eye_lx", "eye_ly", "eye_rx", "eye_ry", "roi_x", "roi_y", "roi_w",
    "roi_h",
];

/// Reads a manifest CSV and decodes every referenced image.
///
/// Image paths are resolved relative to the manifest's directory. Errors name
/// the 1-based data row (the header is row 0).
pub fn ingest_manifest(manifest_path: &Path) -> Result<Vec<FaceSample>, DatasetError> {
    let text = fs::read_to_string(manifest_path).map_err(|source| DatasetError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| DatasetError::MalformedRow {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    if header.iter().ne(MANIFEST_HEADER.iter().copied()) {
        return Err(DatasetError::MalformedRow {
            row: 0,
            message: format!("header must be `{}`", MANIFEST_HEADER.join(",")),
        });
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DatasetError::MalformedRow {
            row,
            message: e.to_string(),
        })?;
        if record.len() != MANIFEST_HEADER.len() {
            return Err(DatasetError::MalformedRow {
                row,
                message: format!("expected {} fields, found {}", MANIFEST_HEADER.len(), record.len()),
            });
        }
        let subject = record[0].to_string();
        if subject.is_empty() {
            return Err(DatasetError::MalformedRow {
                row,
                message: "empty subject_id".into(),
            });
        }
        let domain = Domain::from_token(&record[2]).ok_or_else(|| DatasetError::UnknownDomain {
            row,
            token: record[2].to_string(),
        })?;
        let mut nums = [0.0f64; 8];
        for (k, slot) in nums.iter_mut().enumerate() {
            let field = &record[3 + k];
            *slot = field.parse().map_err(|_| DatasetError::MalformedRow {
                row,
                message: format!("{} is not a number: {:?}", MANIFEST_HEADER[3 + k], field),
            })?;
        }
        let path = base.join(&record[1]);
        let image = image::open(&path)
            .map_err(|e| DatasetError::Image {
                row,
                path: path.clone(),
                message: e.to_string(),
            })?
            .to_rgb8();
        let sample = FaceSample::new(
            subject,
            domain,
            image,
            Roi::new(nums[4], nums[5], nums[6], nums[7]),
            Point::new(nums[0], nums[1]),
            Point::new(nums[2], nums[3]),
        )
        .map_err(|source| DatasetError::InvalidSample { row, source })?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Writes every sample as `<subject>_<domain>.png` under `dir` together with
/// a `manifest.csv` that [`ingest_manifest`] reads back.
pub fn write_manifest(samples: &[FaceSample], dir: &Path) -> Result<PathBuf, DatasetError> {
    let write_err = |path: &Path, e: &dyn std::fmt::Display| DatasetError::Write {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| write_err(dir, &e))?;
    let manifest = dir.join("manifest.csv");
    let mut writer = csv::Writer::from_path(&manifest).map_err(|e| write_err(&manifest, &e))?;
    writer
        .write_record(MANIFEST_HEADER)
        .map_err(|e| write_err(&manifest, &e))?;
    for s in samples {
        let file = format!("{}_{}.png", s.subject_id(), s.domain().token());
        let path = dir.join(&file);
        s.image().save(&path).map_err(|e| write_err(&path, &e))?;
        let (l, r, roi) = (s.left_eye(), s.right_eye(), s.roi());
        let fields = [
            s.subject_id().to_string(),
            file,
            s.domain().token().to_string(),
            l.x.to_string(),
            l.y.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            roi.x.to_string(),
            roi.y.to_string(),
            roi.w.to_string(),
            roi.h.to_string(),
        ];
        writer.write_record(&fields).map_err(|e| write_err(&manifest, &e))?;
    }
    writer.flush().map_err(|e| write_err(&manifest, &e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::RgbImage;

    fn write_png(dir: &Path, name: &str) {
        RgbImage::new(400, 360).save(dir.join(name)).unwrap();
    }

    fn manifest(dir: &Path, rows: &[&str]) -> PathBuf {
        let path = dir.join("manifest.csv");
        let mut text = MANIFEST_HEADER.join(",");
        for r in rows {
            text.push('\n');
            text.push_str(r);
        }
        fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn parses_documented_row() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("img")).unwrap();
        write_png(&dir.path().join("img"), "s01_id.png");
        let path = manifest(dir.path(), &["s01,img/s01_id.png,id,120,80,260,80,40,30,360,300"]);
        let samples = ingest_manifest(&path).unwrap();
        assert_eq!(samples.len(), 1);
        let s = &samples[0];
        assert_eq!(s.subject_id(), "s01");
        assert_eq!(s.domain(), Domain::IdDocument);
        assert_eq!(s.left_eye(), Point::new(120.0, 80.0));
        assert_eq!(s.right_eye(), Point::new(260.0, 80.0));
        assert_eq!(s.roi(), Roi::new(40.0, 30.0, 360.0, 300.0));
    }

    #[test]
    fn unknown_domain_names_row() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "a.png");
        let path = manifest(
            dir.path(),
            &[
                "s01,a.png,id,120,80,260,80,40,30,360,300",
                "s01,a.png,passport,120,80,260,80,40,30,360,300",
            ],
        );
        match ingest_manifest(&path) {
            Err(DatasetError::UnknownDomain { row, token }) => {
                assert_eq!(row, 2);
                assert_eq!(token, "passport");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "a.png");

        let path = manifest(dir.path(), &["s01,a.png,id,x,80,260,80,40,30,360,300"]);
        assert!(matches!(ingest_manifest(&path), Err(DatasetError::MalformedRow { row: 1, .. })));

        let path = manifest(dir.path(), &["s01,a.png,id,120,80"]);
        assert!(matches!(ingest_manifest(&path), Err(DatasetError::MalformedRow { row: 1, .. })));

        let path = manifest(dir.path(), &["s01,missing.png,id,120,80,260,80,40,30,360,300"]);
        assert!(matches!(ingest_manifest(&path), Err(DatasetError::Image { row: 1, .. })));

        // eyes outside the ROI
        let path = manifest(dir.path(), &["s01,a.png,selfie,10,10,260,80,40,30,360,300"]);
        assert!(matches!(
            ingest_manifest(&path),
            Err(DatasetError::InvalidSample { row: 1, .. })
        ));

        assert!(matches!(
            ingest_manifest(&dir.path().join("nope.csv")),
            Err(DatasetError::Io { .. })
        ));
    }

    #[test]
    fn bad_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "subject,path\n").unwrap();
        assert!(matches!(ingest_manifest(&path), Err(DatasetError::MalformedRow { row: 0, .. })));
    }
}
