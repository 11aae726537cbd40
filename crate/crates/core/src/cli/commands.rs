use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use super::{Cli, Command, RunConfig};
use crate::bridge::{
    compare_histograms, event_seed, parse_events, read_reference_histogram, run_pipeline,
    write_comparison_csv, write_histogram_csv, write_records_jsonl, HadronRecord, MesonRecord,
    PipelineConfig,
};
use crate::error::{Error, Result};
use crate::hadronize::hadronize_at_detuning;
use crate::hilbert::{Hamiltonian, HamiltonianSpec};
use crate::lattice::{blockade_radius, InteractionTable};
use crate::observe::{
    charges_from_field, field_expectations, max_entropy_sweep, FieldExpectation, PhaseDiagram,
};
use crate::propagate::{evolve_observed, uniform_times};

#[derive(Serialize)]
struct Metadata<'a> {
    program: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: RunConfig,
    files: &'a [&'a str],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

/// Phase diagram together with everything needed to reproduce it.
#[derive(Serialize)]
struct SweepDocument {
    program: &'static str,
    version: &'static str,
    config: RunConfig,
    diagram: PhaseDiagram,
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(cfg: &RunConfig) -> Result<Self> {
        let dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        log::info!("writing {}", path.display());
        Ok(BufWriter::new(File::create(path)?))
    }

    /// `<command>.meta.json` describing everything needed to redo the run.
    fn metadata(
        &self,
        command: &'static str,
        cfg: &RunConfig,
        files: &[&str],
        notes: Vec<String>,
    ) -> Result<()> {
        let mut config = cfg.clone();
        config.output.dir = None;
        let meta = Metadata {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.hadronization.seed,
            config,
            files,
            notes,
        };
        let stem = command.replace('-', "_");
        let mut w = self.create(&format!("{stem}.meta.json"))?;
        serde_json::to_writer_pretty(&mut w, &meta)?;
        w.write_all(b"\n")?;
        w.flush()?;
        // Loadable with --config to redo the run.
        let mut t = self.create(&format!("{stem}.config.toml"))?;
        t.write_all(meta.config.to_toml().as_bytes())?;
        t.flush()?;
        Ok(())
    }
}

pub fn execute(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    match &cli.command {
        Command::Geometry => geometry(cfg, &mut std::io::stdout().lock()),
        Command::ShowConfig => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Evolve => evolve(cfg),
        Command::EntropySweep { .. } => entropy_sweep(cfg),
        Command::Hadronize {
            events, reference, ..
        } => match events {
            Some(path) => hadronize_events(cfg, path, reference.as_deref()),
            None => hadronize_scan(cfg),
        },
    }
}

fn geometry<W: Write>(cfg: &RunConfig, out: &mut W) -> Result<()> {
    let geom = cfg.geometry()?;
    let params = cfg.params();
    let rb = blockade_radius(&params);
    writeln!(
        out,
        "# n_rungs={} a_um={} rho={} r_b_um={} rb_over_a={}",
        geom.n_rungs,
        geom.spacing,
        geom.inv_aspect_ratio,
        rb,
        rb / geom.spacing
    )?;
    writeln!(out, "atom,rung,leg,x_um,y_um")?;
    for (j, [x, y]) in geom.positions.iter().enumerate() {
        writeln!(out, "{j},{},{},{x},{y}", j / 2 + 1, j % 2)?;
    }
    writeln!(out)?;
    writeln!(out, "atom_j,atom_k,distance_um,v_rad_per_us")?;
    for (j, k, v) in InteractionTable::new(&geom, &params)?.pairs() {
        writeln!(out, "{j},{k},{},{v}", geom.distance(j, k))?;
    }
    out.flush()?;
    Ok(())
}

fn evolve(cfg: &RunConfig) -> Result<()> {
    let geom = cfg.geometry()?;
    let params = cfg.params();
    let krylov = cfg.krylov();
    let e = &cfg.evolution;
    let basis = Arc::new(e.basis.build(&geom, e.max_atoms)?);
    let psi0 = e.initial.prepare(&geom, &params, basis.clone(), krylov)?;
    let spec = HamiltonianSpec {
        max_atoms: e.max_atoms,
        ..HamiltonianSpec::new(geom.clone(), params)
    };
    let h = Hamiltonian::new(&spec, basis)?;
    let times = uniform_times(e.window, e.n_samples);
    let (traj, _) = evolve_observed(&h, &psi0, &times, krylov, |t, s| {
        log::debug!("t = {t}");
        field_expectations(s, &geom)
    })?;
    log::info!(
        "{} Krylov steps, {} matvecs",
        traj.stats.steps,
        traj.stats.matvecs
    );

    let out = Output::new(cfg)?;
    let mut field = csv::Writer::from_writer(out.create("evolve_field.csv")?);
    field.write_record([
        "time", "rung", "e_mean", "p_minus", "p_zero", "p_plus", "p_rr",
    ])?;
    let mut charges = csv::Writer::from_writer(out.create("evolve_charges.csv")?);
    charges.write_record(["time", "link", "charge"])?;
    for (&t, f) in traj.times.iter().zip(&traj.snapshots) {
        write_field_rows(&mut field, t, f)?;
        for (i, q) in charges_from_field(&f.mean)?.into_iter().enumerate() {
            charges.serialize((t, i + 1, q))?;
        }
    }
    field.flush()?;
    charges.flush()?;
    out.metadata(
        "evolve",
        cfg,
        &["evolve_field.csv", "evolve_charges.csv"],
        Vec::new(),
    )
}

fn write_field_rows<W: Write>(w: &mut csv::Writer<W>, t: f64, f: &FieldExpectation) -> Result<()> {
    for j in 0..f.n_rungs() {
        w.serialize((
            t,
            j + 1,
            f.mean[j],
            f.p_minus[j],
            f.p_zero[j],
            f.p_plus[j],
            f.p_rr[j],
        ))?;
    }
    Ok(())
}

fn entropy_sweep(cfg: &RunConfig) -> Result<()> {
    let spec = HamiltonianSpec {
        max_atoms: cfg.evolution.max_atoms,
        ..HamiltonianSpec::new(cfg.geometry()?, cfg.params())
    };
    let progress = |done: usize, total: usize| log::info!("grid point {done}/{total} done");
    let diagram = max_entropy_sweep(
        &spec,
        &cfg.sweep.delta_over_omega,
        &cfg.sweep.rb_over_a,
        &cfg.sweep_settings(),
        &progress,
    )?;
    let out = Output::new(cfg)?;
    let mut w = csv::Writer::from_writer(out.create("entropy_sweep.csv")?);
    w.write_record(["delta_over_omega", "rb_over_a", "max_entropy"])?;
    for row in diagram.points() {
        w.serialize(row)?;
    }
    w.flush()?;
    let mut config = cfg.clone();
    config.output.dir = None;
    let doc = SweepDocument {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        diagram,
    };
    let mut j = out.create("entropy_sweep.json")?;
    serde_json::to_writer_pretty(&mut j, &doc)?;
    j.write_all(b"\n")?;
    j.flush()?;
    out.metadata(
        "entropy-sweep",
        cfg,
        &["entropy_sweep.csv", "entropy_sweep.json"],
        Vec::new(),
    )
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))
}

fn hadronize_events(cfg: &RunConfig, events: &Path, reference: Option<&Path>) -> Result<()> {
    let parsed = parse_events(open(events)?)?;
    let mut notes: Vec<String> = parsed.errors.iter().map(|e| e.to_string()).collect();
    let pipeline = PipelineConfig {
        setup: cfg.hadronization_setup()?,
        n_shots: cfg.hadronization.n_shots,
        seed: cfg.hadronization.seed,
    };
    let result = run_pipeline(&parsed.events, &pipeline)?;
    notes.extend(
        result
            .failures
            .iter()
            .map(|f| format!("event {}: {}", f.event_id, f.message)),
    );
    for n in &notes {
        log::warn!("skipped {n}");
    }
    log::info!(
        "{} events hadronized, mean multiplicity {:.4}",
        result.events.len(),
        result.histogram.mean()
    );

    let out = Output::new(cfg)?;
    write_records_jsonl(out.create("hadrons.jsonl")?, &result.records)?;
    write_histogram_csv(out.create("multiplicity.csv")?, &result.histogram)?;
    let mut w = csv::Writer::from_writer(out.create("events.csv")?);
    w.write_record([
        "event_id",
        "e_cm",
        "delta_over_omega",
        "accepted_shots",
        "mean_multiplicity",
    ])?;
    for s in &result.events {
        w.serialize((
            s.event_id,
            s.e_cm,
            s.delta_over_omega,
            s.accepted_shots,
            s.mean_multiplicity,
        ))?;
    }
    w.flush()?;
    let mut files = vec!["hadrons.jsonl", "multiplicity.csv", "events.csv"];
    if let Some(path) = reference {
        let reference = read_reference_histogram(open(path)?)?;
        let cmp = compare_histograms(&result.histogram, &reference);
        log::info!(
            "reference mean {:.4}, total variation distance {:.4}",
            cmp.reference_mean,
            cmp.total_variation
        );
        write_comparison_csv(out.create("multiplicity_comparison.csv")?, &cmp)?;
        files.push("multiplicity_comparison.csv");
        notes.push(format!("reference: {}", path.display()));
    }
    out.metadata("hadronize", cfg, &files, notes)
}

fn hadronize_scan(cfg: &RunConfig) -> Result<()> {
    let h = &cfg.hadronization;
    if h.delta_grid.is_empty() {
        return Err(Error::Config(
            "hadronize needs --events or a Δ/Ω grid (--delta-grid or hadronization.delta_grid)"
                .into(),
        ));
    }
    let setup = cfg.hadronization_setup()?;
    let out = Output::new(cfg)?;
    let mut records = Vec::new();
    let mut summary = csv::Writer::from_writer(out.create("multiplicity_scan.csv")?);
    summary.write_record(["delta_over_omega", "accepted_shots", "mean_multiplicity"])?;
    let mut hist = csv::Writer::from_writer(out.create("multiplicity_scan_hist.csv")?);
    hist.write_record(["delta_over_omega", "multiplicity", "count", "frequency"])?;
    for (i, &ratio) in h.delta_grid.iter().enumerate() {
        let ev = hadronize_at_detuning(
            ratio,
            h.e_cm,
            &setup,
            h.n_shots,
            event_seed(h.seed, i as u64),
        )?;
        log::info!(
            "Δ/Ω = {ratio}: mean multiplicity {:.4}",
            ev.histogram.mean()
        );
        summary.serialize((ratio, ev.histogram.total(), ev.histogram.mean()))?;
        if ev.histogram.total() > 0 {
            for (m, c, f) in ev.histogram.rows() {
                hist.serialize((ratio, m, c, f))?;
            }
        }
        records.extend(ev.shots.iter().map(|s| HadronRecord {
            event_id: i as u64,
            shot_id: s.shot_id,
            multiplicity: s.multiplicity,
            mesons: s.mesons.iter().map(MesonRecord::from).collect(),
            rr_violations: s.rr_violations,
            accepted: s.accepted,
            e_cm: h.e_cm,
            delta_over_omega: ratio,
            t_f: setup.t_f,
        }));
    }
    summary.flush()?;
    hist.flush()?;
    write_records_jsonl(out.create("hadrons.jsonl")?, &records)?;
    out.metadata(
        "hadronize",
        cfg,
        &[
            "multiplicity_scan.csv",
            "multiplicity_scan_hist.csv",
            "hadrons.jsonl",
        ],
        Vec::new(),
    )
}

#[cfg(test)]
pub(crate) fn geometry_text(cfg: &RunConfig) -> Result<String> {
    let mut buf = Vec::new();
    geometry(cfg, &mut buf)?;
    Ok(String::from_utf8(buf).expect("geometry output is UTF-8"))
}
