use specmult_core::cdv::construction_report;
use specmult_core::graph::{generators::complete, parse_graph};
use specmult_core::kernel::{l1_tail_check, ModelPlaneParams};
use specmult_core::pipeline::{run_pipeline, BoundReport, PipelineParams};
use specmult_core::{Error, ErrorClass};

#[test]
fn bound_report_round_trips_through_json() {
    let g = complete(5).unwrap();
    let r = run_pipeline(&g, &PipelineParams::for_graph(&g, 1.0).unwrap(), 2).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    for key in ["\"m\"", "\"m_prime\"", "\"rank_deficit\"", "\"trace_value\"", "\"n_steps\"", "\"verdicts\""] {
        assert!(text.contains(key), "missing {key}");
    }
    let back: BoundReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn parsed_graph_feeds_pipeline() {
    let text = "# two triangles joined by an edge\ngraph 6\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n";
    let g = parse_graph(text).unwrap().graph;
    let params = PipelineParams { net_radius: Some(1), ..PipelineParams::for_graph(&g, 1.0).unwrap() };
    for j in 2..=4 {
        let r = run_pipeline(&g, &params, j).unwrap();
        assert!(r.verdicts.all(), "j = {j}: {r:?}");
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    match parse_graph("graph 3\n0 1\n1 x\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(parse_graph("0 1\n").unwrap_err().class(), ErrorClass::Parse);
}

#[test]
fn kernel_report_serializes_missing_cells_as_null() {
    let r = l1_tail_check(&ModelPlaneParams::default(), 12.0, &[1.0, 2.0]).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["K"], -1.0);
    assert_eq!(v["lhs"].as_array().unwrap().len(), 2);
    assert!(v["mid"].is_null());
}

#[test]
fn construction_reports_for_a_range() {
    for n in 3..=20 {
        let r = construction_report(n).unwrap();
        assert_eq!(r.genus, n as i64);
        assert_eq!(r.near_degenerate_count, n - 1);
        assert_eq!(r.spectrum.len(), n + 1);
    }
}
