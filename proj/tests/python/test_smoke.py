"""End-to-end smoke checks for the Python bindings."""

import math

import pytest

import coarsemap as cm


def test_projection_round_trip():
    frame = cm.LocalFrame(cm.GeoPoint(lat=37.7749, lon=-122.4194))
    p = cm.to_plane(frame, cm.GeoPoint(lat=37.7755, lon=-122.4185))
    back = cm.to_geo(frame, p)
    assert back.lat == pytest.approx(37.7755, abs=1e-9)
    assert back.lon == pytest.approx(-122.4185, abs=1e-9)
    with pytest.raises(cm.OutOfExtent):
        cm.to_plane(frame, cm.GeoPoint(lat=39.0, lon=-122.4194))


def test_interpolation_spacing():
    pts = cm.interpolate_way([cm.PlanePoint(0.0, 0.0), cm.PlanePoint(6.0, 0.0)], 1.5)
    assert len(pts) == 5
    gaps = [pts[i + 1].x - pts[i].x for i in range(4)]
    assert all(g == pytest.approx(1.5, abs=1e-12) for g in gaps)
    with pytest.raises(cm.DegeneratePolyline):
        cm.interpolate_way([cm.PlanePoint(1.0, 1.0)], 1.5)


def test_synthetic_scene_pipeline():
    synth = cm.synthesize_scenario(cm.SyntheticKind.Intersection, 0)
    scenario = synth.scenario
    assert scenario.scenario_id == "intersection-0"

    graph = cm.filter_roads(synth.graph)
    vmap = cm.build_vector_map(graph, scenario.frame)
    assert len(vmap) > 0
    assert any(s.is_intersection for s in vmap.segments)

    focal = scenario.focal_track()
    field = cm.extract_receptive_field(
        vmap, focal.states[49].position, 100.0
    )
    assert 0 < len(field) <= len(vmap)

    prediction = cm.predict_map_following(focal, vmap, scenario.spec)
    assert 1 <= len(prediction.modes) <= 3
    assert sum(m.confidence for m in prediction.modes) == pytest.approx(1.0)

    gt = synth.ground_truth[focal.agent_id]
    result = cm.evaluate_agent(prediction, gt)
    assert result.min_fde <= 2.0
    assert not result.missed
    assert len(result.per_frame_de) == len(gt)
    assert sum(result.per_frame_de) / len(gt) == pytest.approx(result.min_ade)


def test_scenario_json_round_trip():
    synth = cm.synthesize_scenario(cm.SyntheticKind.Curved, 3)
    text = cm.save_scenario(synth.scenario)
    back = cm.load_scenario(text)
    assert back.scenario_id == synth.scenario.scenario_id
    assert cm.save_scenario(back) == text
    with pytest.raises(cm.SchemaViolation):
        cm.load_scenario("{}")


def test_metrics_and_aggregation():
    gt = [cm.PlanePoint(float(k), 0.0) for k in range(60)]
    exact = cm.Prediction()
    exact.trajectory = gt
    exact.confidence = 1.0
    pred = cm.PredictionSet()
    pred.agent_id = "a"
    pred.modes = [exact]

    agent = cm.EvaluatedAgent()
    agent.cls = cm.AgentClass.Vehicle
    agent.context = cm.RoadContext.Straight
    agent.result = cm.evaluate_agent(pred, gt)

    report = cm.aggregate([agent])
    assert report.overall.count == 1
    assert report.overall.min_ade == 0.0
    assert report.overall.miss_rate == 0.0
    csv = cm.aggregate_csv(report)
    assert csv.startswith("count,min_ade,min_fde,miss_rate")


def test_stage_entry_points(tmp_path):
    for seed in range(3):
        synth = cm.synthesize_scenario(cm.SyntheticKind.Straight, seed)
        scenario_id = synth.scenario.scenario_id
        (tmp_path / "scenes").mkdir(exist_ok=True)
        (tmp_path / "maps").mkdir(exist_ok=True)
        cm.save_scenario_file(synth.scenario, tmp_path / "scenes" / f"{scenario_id}.json")
        (tmp_path / "maps" / f"{scenario_id}.osm").write_text(
            cm.serialize_osm_xml(synth.graph)
        )

    config = cm.RunConfig()
    config.scenarios = tmp_path / "scenes"
    config.map_dir = tmp_path / "maps"
    config.out_dir = tmp_path / "vec"
    code, log = cm.run_preprocess(config)
    assert code == 0
    assert "preprocessed 3 scenarios" in log

    config.map_dir = tmp_path / "vec"
    config.out_dir = tmp_path / "rep"
    config.predictor = cm.PredictorKind.MapFollowing
    code, log = cm.run_evaluate(config)
    assert code == 0
    assert (tmp_path / "rep" / "aggregate.csv").exists()
    assert (tmp_path / "rep" / "per_context.svg").exists()
    assert "evaluated 3 agents across 3 scenarios" in log
