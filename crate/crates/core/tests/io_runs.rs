use std::fs;

use selfdual::io::{exit_code, execute, read_state, Mode, Overrides, Report, RunConfig};

fn config(text: &str) -> RunConfig {
    RunConfig::from_toml(text).unwrap()
}

#[test]
fn minimize_run_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(
        "[grid]\ndim = 2\nsizes = [32, 32]\n[bundle]\ndegrees = [1]\n[physics]\nepsilon = 0.25\n\
         [init]\nzeros = [[0.4, 0.6]]\ncharges = [1]\n[solver]\ntrace = true\n\
         [diagnostics]\nlist = [\"vortices\", \"current\", \"discrepancy\"]\n",
    );
    let ov = Overrides { seed: None, out: Some(tmp.path().join("out")) };
    let res = execute(&cfg, None, &ov);
    assert_eq!(exit_code(&res), 0);
    let o = res.unwrap();
    let dir = tmp.path().join("out");
    for f in &o.report.files {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,energy,grad_norm,step_size\n"));
    let energy_csv = fs::read_to_string(dir.join("energy.csv")).unwrap();
    assert!(energy_csv.starts_with("epsilon,dirichlet,maxwell,potential,total\n"));

    let report = Report::from_json(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report, o.report);
    assert_eq!(report.scalars.charges, Some(vec![1]));
    let (st, eps) = read_state(&dir.join("final.bin")).unwrap();
    assert_eq!(eps, Some(0.25));
    assert_eq!(st.grid().sizes(), &[32, 32]);

    // a dump restarts a run
    let text = format!(
        "[grid]\ndim = 2\nsizes = [32, 32]\n[bundle]\ndegrees = [1]\n[physics]\nepsilon = 0.25\n\
         [init]\nkind = \"dump\"\npath = {:?}\n",
        dir.join("final.bin")
    );
    let again = execute(&config(&text), Some(Mode::Minimize), &Overrides { out: Some(tmp.path().join("re")), ..Default::default() })
        .unwrap();
    assert!(again.converged);
    assert!(again.report.solve.unwrap().iters <= 2);
}

#[test]
fn dump_of_other_grid_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let first = config("[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\nepsilon = 0.3\n");
    execute(&first, None, &Overrides { out: Some(tmp.path().to_path_buf()), ..Default::default() }).unwrap();
    let text = format!(
        "[grid]\ndim = 2\nsizes = [16, 20]\n[physics]\nepsilon = 0.3\n[init]\nkind = \"dump\"\npath = {:?}\n",
        tmp.path().join("final.bin")
    );
    let res = execute(&config(&text), None, &Overrides { out: Some(tmp.path().join("x")), ..Default::default() });
    assert_eq!(exit_code(&res), 1);
}

#[test]
fn config_validation_messages() {
    let bad = [
        ("[grid]\ndim = 4\nsizes = [8, 8, 8, 8]\n[physics]\nepsilon = 0.3\n", "grid.dim"),
        ("[grid]\ndim = 2\nsizes = [16]\n[physics]\nepsilon = 0.3\n", "grid.sizes"),
        ("[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\n", "epsilon or schedule"),
        ("[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\nepsilon = 0.3\nschedule = [0.3]\n", "not both"),
        ("[grid]\ndim = 2\nsizes = [16, 16]\n[bundle]\ndegrees = [1]\n[physics]\nepsilon = 0.3\n", "trivial bundle"),
        ("[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\nepsilon = 0.3\n[diagnostics]\nlist = [\"vorticity\"]\n", "unknown diagnostic"),
        ("[grid]\ndim = 2\nsizes = [16, 16]\n[physics]\nepsilon = 0.3\n[init]\nkind = \"dump\"\n", "init.path"),
        ("[grid]\ndim = 3\nsizes = [8, 8, 8]\n[bundle]\ndegrees = [1]\n[physics]\nepsilon = 0.3\n", "3 entries"),
    ];
    for (text, needle) in bad {
        let err = RunConfig::from_toml(text).unwrap_err().to_string();
        assert!(err.contains(needle), "{needle:?} not in {err:?}");
    }
}
