import json

import geojson
import pandas as pd
import pytest

import run_scoring_flow
from conftest import LONDON, make_segment
from src.config.settings import load_settings
from src.core.errors import (
    DuplicateKeyError,
    EmptyInputError,
    InputFileError,
    InsufficientDataError,
    InvalidParameterError,
    ParsingError,
    ReferentialIntegrityError,
)
from src.geo.projection import GeoPoint, LocalProjection, PlanarPoint
from src.model.parsing import parse_photos, parse_streets, parse_venues, photo_to_json, streets_to_geojson
from src.model.types import Gender, MachineTag, PhotoRecord
from src.pipeline import (
    STAGES,
    ScoringNodes,
    ScoringOrchestrator,
    SynthSpec,
    annotation_agreement,
    build_graph,
    read_assignments,
    report_document,
    run_pipeline,
    synth_city,
)

RUN_FILES = {
    "assignments.csv", "features.csv", "metrics.csv", "regression.json", "scored_streets.geojson", "report.json",
    "bins_photo_at_night.csv", "bins_manhood.csv", "bins_zwalkability.csv",
    "stability_photo_at_night.csv", "stability_manhood.csv", "stability_zwalkability.csv",
    "stability_mean_age.csv", "stability_median_age.csv",
}


@pytest.fixture(scope="module")
def city_paths(tmp_path_factory):
    directory = tmp_path_factory.mktemp("city")
    paths = synth_city(SynthSpec(n_segments=60, seed=3)).write(directory)
    return {k: str(v) for k, v in paths.items()}


def config_for(paths, output_dir, **overrides):
    return load_settings(overrides={
        "streets_path": paths["streets"],
        "photos_path": paths.get("photos"),
        "venues_path": paths.get("venues"),
        "output_dir": str(output_dir),
        **overrides,
    }, use_env=False)


def read_bytes(paths):
    return {p.name: p.read_bytes() for p in paths}


@pytest.fixture
def one_street_paths(tmp_path):
    """Four far-apart streets; every photo lies on street "a"."""
    segments = [
        make_segment(sid, [(i * 500, 0), (i * 500 + 100, 0)], walkability=2.0 + i * 0.5, safety=1.0 + i)
        for i, sid in enumerate("abcd")
    ]
    projection = LocalProjection(LONDON)
    photos = []
    for k in range(10):
        spot = projection.unproject(PlanarPoint(10.0 + 8 * k, 5.0))
        label = "night" if k % 3 == 0 else "daylight"
        photos.append(PhotoRecord(
            id=f"p{k}", location=spot, owner_id=f"u{k % 4}", gender=Gender.MALE if k % 2 else Gender.FEMALE,
            age=30 + k, user_tags=("tree", "car", "sky"), machine_tags=(MachineTag(label, 0.99),),
        ))
    streets = tmp_path / "streets.geojson"
    streets.write_text(streets_to_geojson(segments), encoding="utf-8")
    photo_file = tmp_path / "photos.jsonl"
    photo_file.write_text("".join(photo_to_json(p) + "\n" for p in photos), encoding="utf-8")
    return {"streets": str(streets), "photos": str(photo_file)}


def test_full_run_writes_identical_bundles(city_paths, tmp_path):
    orchestrator = ScoringOrchestrator(config_for(city_paths, tmp_path / "out"))
    first = read_bytes(orchestrator.execute("run"))
    assert set(first) == RUN_FILES
    second = read_bytes(run_pipeline(config_for(city_paths, tmp_path / "out")))
    assert first == second


def test_full_run_report(city_paths, tmp_path):
    config = config_for(city_paths, tmp_path / "out")
    orchestrator = ScoringOrchestrator(config)
    state = orchestrator.run("run")
    with open(city_paths["photos"], encoding="utf-8") as f:
        photos, _ = parse_photos(f)

    report = report_document(state, config)
    assert report["inputs"]["segments"] == 60
    assert report["inputs"]["photos"] == len(photos)
    assert report["join"]["matched_photos"] == len(photos)
    assert report["join"]["photo_segment_pairs"] == len(photos)
    assert report["join"]["unmatched_photos"] == 0
    assert set(report["correlations"]) >= {"photo_at_night~safety", "manhood~safety", "zwalkability~walkability"}
    assert set(report["regressions"]) == {"safety", "walkability"}
    assert report["config"]["buffer_radius"] == 22.5
    assert set(STAGES) <= set(orchestrator.tracker.summary())


def test_synthetic_photos_join_their_own_street(city_paths, tmp_path):
    orchestrator = ScoringOrchestrator(config_for(city_paths, tmp_path / "out"))
    orchestrator.execute("join")
    frame = pd.read_csv(tmp_path / "out" / "assignments.csv", dtype=str)
    with open(city_paths["photos"], encoding="utf-8") as f:
        owners = {p.id: p.owner_id for p in parse_photos(f)[0]}
    photo_rows = frame[frame.record_type == "photo"]
    assert len(photo_rows) == len(owners)
    for record_id, segment_id in zip(photo_rows.record_id, photo_rows.segment_id):
        assert owners[record_id].startswith(f"u{segment_id}_")
    assert list(frame.columns) == ["record_type", "record_id", "segment_id"]


def test_features_from_assignments_match_fused_run(city_paths, tmp_path):
    ScoringOrchestrator(config_for(city_paths, tmp_path / "joined")).execute("join")
    staged = ScoringOrchestrator(config_for(city_paths, tmp_path / "staged"))
    state = staged.run("features", assignments=tmp_path / "joined" / "assignments.csv")
    staged_bytes = read_bytes(staged.write(state, "features"))
    fused_bytes = read_bytes(ScoringOrchestrator(config_for(city_paths, tmp_path / "fused")).execute("features"))
    assert staged_bytes == fused_bytes


def test_parallel_run_matches_sequential(city_paths, tmp_path):
    sequential = read_bytes(ScoringOrchestrator(config_for(city_paths, tmp_path / "one")).execute("metrics"))
    parallel = read_bytes(ScoringOrchestrator(config_for(city_paths, tmp_path / "four", workers=4)).execute("metrics"))
    assert sequential == parallel


def test_scored_streets(city_paths, tmp_path):
    ScoringOrchestrator(config_for(city_paths, tmp_path / "out")).execute("score")
    collection = geojson.loads((tmp_path / "out" / "scored_streets.geojson").read_text(encoding="utf-8"))
    properties = [f["properties"] for f in collection["features"]]
    assert len(properties) == 60
    assert [p["id"] for p in properties] == sorted(p["id"] for p in properties)
    for p in properties:
        assert p["score"] == pytest.approx(p["walkability"])
        assert p["color"].startswith("#") and len(p["color"]) == 7
        assert "photo_at_night" in p


def test_photos_on_one_street(one_street_paths, tmp_path):
    state = ScoringOrchestrator(config_for(one_street_paths, tmp_path / "out")).run("metrics")
    night = state["metrics"]["photo_at_night"]
    assert night.excluded == 3
    assert not night.available
    assert "photo_at_night" in state["unavailable"]
    features = {f.segment_id: f for f in state["features"]}
    assert features["a"].n_photos == 10
    assert features["a"].night_count == 4
    assert features["a"].male_users == 2 and features["a"].female_users == 2
    assert features["a"].ages == (30, 31, 32, 33)
    assert all(features[sid].n_photos == 0 for sid in "bcd")
    report = report_document(state)
    assert report["metrics"]["photo_at_night"]["excluded_segments"] == 3
    assert report["metrics"]["photo_at_night"]["unavailable"]


def test_strict_stats_stops_the_run(one_street_paths, tmp_path):
    config = config_for(one_street_paths, tmp_path / "out", strict_stats="true")
    with pytest.raises(InsufficientDataError) as info:
        ScoringOrchestrator(config).run("metrics")
    assert info.value.exit_code == 2


def test_unavailable_items_are_reported(one_street_paths, tmp_path):
    written = ScoringOrchestrator(config_for(one_street_paths, tmp_path / "out")).execute("run")
    report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
    assert "regression:safety" in report["unavailable"]
    assert "photo_at_night" in report["unavailable"]
    assert json.loads((tmp_path / "out" / "regression.json").read_text(encoding="utf-8"))["safety"]["unavailable"]
    assert "report.json" in {p.name for p in written}


def test_ingest_errors(tmp_path, one_street_paths):
    with pytest.raises(InputFileError):
        ScoringOrchestrator(load_settings(use_env=False)).run("ingest")
    with pytest.raises(InputFileError):
        ScoringOrchestrator(config_for({"streets": str(tmp_path / "nope.geojson")}, tmp_path)).run("ingest")

    with open(one_street_paths["photos"], "a", encoding="utf-8") as f:
        f.write("{broken\n")
    lenient = ScoringOrchestrator(config_for(one_street_paths, tmp_path / "out")).run("ingest")
    assert lenient["skipped"]["photos"] == 1
    with pytest.raises(ParsingError):
        ScoringOrchestrator(config_for(one_street_paths, tmp_path / "out", strict="true")).run("ingest")
    with pytest.raises(InvalidParameterError):
        ScoringOrchestrator(load_settings(use_env=False)).run("bogus")


def test_build_graph_checks_stages():
    nodes = ScoringNodes(load_settings(use_env=False))
    assert build_graph(nodes, ["ingest", "join"]) is not None
    for stages in ([], ["join", "ingest"], ["ingest", "ingest"], ["ingest", "sort"]):
        with pytest.raises(InvalidParameterError):
            build_graph(nodes, stages)


def test_read_assignments_errors(tmp_path):
    streets = parse_streets(streets_to_geojson([make_segment("a", [(0, 0), (50, 0)])]))
    photos, _ = parse_photos([json.dumps({"id": "p1", "lon": -0.1276, "lat": 51.5072, "owner_id": "u"})])
    venues, _ = parse_venues([json.dumps({"id": "v1", "lon": -0.1276, "lat": 51.5072, "category": "food"})])

    def load(text):
        path = tmp_path / "assignments.csv"
        path.write_text(text, encoding="utf-8")
        return read_assignments(path, streets, photos, venues)

    joined = load("record_type,record_id,segment_id\nphoto,p1,a\nvenue,v1,a\nphoto,p1,a\n")
    assert joined.photo_idx.tolist() == [0]
    assert joined.venue_seg_idx.tolist() == [0]
    with pytest.raises(ReferentialIntegrityError):
        load("record_type,record_id,segment_id\nphoto,p1,zz\n")
    with pytest.raises(ReferentialIntegrityError):
        load("record_type,record_id,segment_id\nvenue,v9,a\n")
    with pytest.raises(DuplicateKeyError):
        load("record_type,record_id,segment_id\nvenue,v1,a\nvenue,v1,a\n")
    with pytest.raises(ParsingError):
        load("record_type,record_id\nphoto,p1\n")
    with pytest.raises(ParsingError):
        load("record_type,record_id,segment_id\nbus,p1,a\n")
    with pytest.raises(ParsingError):
        load("")
    with pytest.raises(InputFileError):
        read_assignments(tmp_path / "missing.csv", streets, photos, venues)


def test_annotation_agreement():
    result = annotation_agreement([["a", "b", "c", "d", "e"], ["a", "b", "c", "d", "f"]])
    assert result.agreement == pytest.approx(4 / 6)
    assert result.merged_over_intersected == pytest.approx(1.5)
    assert annotation_agreement([["Tree", "car"], ["car", "tree "]]).agreement == 1.0
    disjoint = annotation_agreement([["a"], ["b"]])
    assert disjoint.agreement == 0.0
    assert disjoint.to_dict()["merged_over_intersected"] == "inf"
    three = annotation_agreement([["a", "b"], ["a", "c"], ["a", "b", "c"]])
    assert three.intersected == frozenset({"a"})
    with pytest.raises(InvalidParameterError):
        annotation_agreement([["a"]])
    with pytest.raises(EmptyInputError):
        annotation_agreement([["a"], [" "]])


def test_cli_run_and_exit_codes(one_street_paths, tmp_path):
    base = ["--streets", one_street_paths["streets"], "--photos", one_street_paths["photos"]]
    assert run_scoring_flow.main(["run", *base, "--output-dir", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "report.json").exists()
    assert run_scoring_flow.main(["metrics", *base, "--output-dir", str(tmp_path / "o2"), "--strict-stats"]) == 2
    assert run_scoring_flow.main(["ingest", "--streets", str(tmp_path / "missing.geojson")]) == 1
    assert run_scoring_flow.main(["run", *base, "--buffer-radius", "-3"]) == 1


def test_cli_agree_and_synth(tmp_path, capsys):
    first, second = tmp_path / "one.txt", tmp_path / "two.txt"
    first.write_text("a\nb\nc\nd\ne\n", encoding="utf-8")
    second.write_text("a\nb\nc\nd\nf\n", encoding="utf-8")
    assert run_scoring_flow.main(["agree", str(first), str(second)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["agreement"] == pytest.approx(4 / 6)

    assert run_scoring_flow.main(["synth", "--n-segments", "20", "--seed", "4", "-o", str(tmp_path / "city")]) == 0
    assert len(parse_streets((tmp_path / "city" / "streets.geojson").read_text(encoding="utf-8"))) == 20


def test_cli_walkhood(one_street_paths, tmp_path):
    spot = LocalProjection(LONDON).unproject(PlanarPoint(50.0, 20.0))
    out = tmp_path / "walkhood.geojson"
    code = run_scoring_flow.main([
        "walkhood", "--streets", one_street_paths["streets"],
        "--lon", str(spot.lon), "--lat", str(spot.lat), "--output", str(out),
    ])
    assert code == 0
    feature = geojson.loads(out.read_text(encoding="utf-8"))
    assert feature["geometry"]["type"] == "LineString"
    assert feature["properties"]["segment_id"] == "a"
    far = GeoPoint(spot.lon, spot.lat + 0.01)
    assert run_scoring_flow.main([
        "walkhood", "--streets", one_street_paths["streets"], "--lon", str(far.lon), "--lat", str(far.lat),
    ]) == 1
