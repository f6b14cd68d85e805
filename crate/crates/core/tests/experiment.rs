use ralg_core::experiment::{
    parse_csv, render_table, run_grid, run_solve, table_preset, ConstraintKind, ExperimentConfig, Method, StartRule,
    Status, TableFormat, CSV_HEADER, FEASIBILITY_TOL,
};

fn small_grid() -> ExperimentConfig {
    ExperimentConfig {
        method: Method::ProjectivePenalty,
        constraint: ConstraintKind::BoxSum,
        n_list: vec![4, 6],
        m_list: vec![1.0, 1e4],
        x0: StartRule::Random,
        seed: 42,
        ..ExperimentConfig::default()
    }
}

fn without_time(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(7);
            f.join(",")
        })
        .collect()
}

#[test]
fn csv_is_deterministic_apart_from_timing() {
    let a = render_table(&run_grid(&small_grid()).unwrap(), TableFormat::Csv);
    let b = render_table(&run_grid(&small_grid()).unwrap(), TableFormat::Csv);
    assert_eq!(without_time(&a), without_time(&b));
    let parallel = ExperimentConfig {
        parallel: true,
        ..small_grid()
    };
    let c = render_table(&run_grid(&parallel).unwrap(), TableFormat::Csv);
    assert_eq!(without_time(&a), without_time(&c));
}

#[test]
fn csv_header_and_round_trip() {
    let result = run_grid(&small_grid()).unwrap();
    let csv = render_table(&result, TableFormat::Csv);
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(
        CSV_HEADER,
        "method,n,M,status,delta,epsilon,itn,time_sec,feasibility_gap"
    );
    let rows = parse_csv(&csv).unwrap();
    assert_eq!(rows.len(), 4);
    for (parsed, original) in rows.iter().zip(&result.rows) {
        assert_eq!(parsed.method, original.method);
        assert_eq!(
            (parsed.n, parsed.m, parsed.itn, parsed.status),
            (original.n, original.m, original.itn, original.status)
        );
        assert!((parsed.delta - original.delta).abs() <= 1e-6 * original.delta.abs().max(1e-300));
    }
    assert!(parse_csv("a,b\n1,2\n").is_err());
}

#[test]
fn markdown_has_one_row_per_m_and_column_per_n() {
    let md = render_table(&run_grid(&small_grid()).unwrap(), TableFormat::Markdown);
    let lines: Vec<&str> = md.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].contains("n = 4") && lines[0].contains("n = 6"));
    assert!(lines[2].starts_with("| M = 1 |"));
    assert!(lines[3].starts_with("| M = 10000 |"));
    assert!(lines[2].contains("δ = ") && lines[2].contains("itn = "));
}

#[test]
fn converged_rows_are_feasible() {
    for table in 1..=4 {
        let cfg = ExperimentConfig {
            n_list: vec![5],
            ..table_preset(table).unwrap()
        };
        for row in run_grid(&cfg).unwrap().rows {
            if row.status == Status::Converged {
                let limit = FEASIBILITY_TOL * (1.0 + row.n as f64 * 2.0);
                assert!(row.feasibility_gap <= limit, "table {table}: {row:?}");
            }
            assert!(row.itn <= 7000);
        }
    }
}

#[test]
fn small_penalty_leaves_budget_problem_infeasible() {
    let row = run_solve(&table_preset(2).unwrap(), 10, 1.0);
    assert_eq!(row.status, Status::Infeasible);
    let md = render_table(
        &ralg_core::experiment::ExperimentResult {
            constraint: ConstraintKind::BoxSum,
            rows: vec![row],
        },
        TableFormat::Markdown,
    );
    assert!(md.contains("| – |"));
}

#[test]
fn cell_examples() {
    let row = run_solve(&table_preset(1).unwrap(), 10, 1.0);
    assert_eq!(row.status, Status::Converged);
    assert!(row.epsilon <= 1e-6);
    let row = run_solve(&table_preset(4).unwrap(), 10, 1.0);
    assert_eq!(row.status, Status::Converged);
    assert!(row.delta <= 1e-2);
}

#[test]
fn bad_given_start_is_an_error_row() {
    let cfg = ExperimentConfig {
        x0: StartRule::Given(vec![0.0; 3]),
        ..ExperimentConfig::default()
    };
    let row = run_solve(&cfg, 10, 1.0);
    assert_eq!(row.status, Status::Error);
    assert!(row.message.is_some());
    assert!(run_grid(&cfg).is_err());
}
