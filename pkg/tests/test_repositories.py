import json
import threading

import numpy as np
import pytest

from vembench.errors import MeshParseError, MeshValidationError
from vembench.mesh.builtin import builtin_mesh
from vembench.repositories.mesh_repository import JsonMeshRepository, mesh_to_document
from vembench.repositories.results_repository import CsvResultCollector, read_results
from vembench.schemas import MESH_FORMAT, RESULT_COLUMNS, BenchResultRow


def make_row(**overrides):
    values = {
        "mesh": "quad",
        "problem": "laplace",
        "formulation": "S3",
        "k": 2,
        "tau": 1.0,
        "err_energy": 0.125,
        "err_l2": 0.0625,
        "cond": 42.0,
        "seconds": 0.5,
    }
    values.update(overrides)
    return BenchResultRow(**values)


@pytest.mark.parametrize("name", ["quad", "bezier4"])
def test_mesh_round_trip_through_json(tmp_path, name):
    mesh = builtin_mesh(name)
    repository = JsonMeshRepository()
    path = tmp_path / f"{name}.json"
    repository.save(mesh, path)

    payload = json.loads(path.read_text(encoding="utf-8"))
    assert payload["version"] == MESH_FORMAT
    assert payload["name"] == name

    loaded = repository.load(path)
    assert loaded.n_elements == mesh.n_elements
    assert np.allclose(loaded.vertices, mesh.vertices)
    for original, copy in zip(mesh.elements, loaded.elements):
        assert copy.area == pytest.approx(original.area, rel=1e-12)
        assert copy.is_curved == original.is_curved


def test_straight_edges_are_saved_without_control_points(tmp_path):
    path = tmp_path / "quad.json"
    JsonMeshRepository().save(builtin_mesh("quad"), path)
    edges = json.loads(path.read_text(encoding="utf-8"))["elements"][0]["edges"]
    assert all(set(edge) == {"v"} for edge in edges)


def test_resolve_prefers_builtin_names(tmp_path):
    repository = JsonMeshRepository()
    assert repository.resolve("octagon").n_elements == 9
    path = tmp_path / "custom.json"
    document = mesh_to_document(builtin_mesh("quad")).model_copy(update={"name": "mesh"})
    path.write_text(document.model_dump_json(exclude_none=True), encoding="utf-8")
    assert repository.resolve(str(path)).name == "custom"


@pytest.mark.parametrize(
    "content",
    [
        "{",
        json.dumps({"version": "vem-mesh-0", "vertices": [[0, 0], [1, 0], [0, 1]], "elements": [{"edges": [{"v": [0, 1]}]}]}),
        json.dumps({"vertices": [[0, 0], [1, 0], [0, 1]], "elements": [{"edges": [{"v": [0, 7]}]}]}),
        json.dumps({"vertices": [[0, 0], [1, 0], [0, 1]], "elements": [{"edges": [{"v": [0, 1], "bezier": [[0, 0]]}]}]}),
        json.dumps({"vertices": [[0, 0], [1, 0], [0, 1]], "elements": [], "extra": 1}),
    ],
)
def test_malformed_documents_raise_parse_errors(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(MeshParseError) as excinfo:
        JsonMeshRepository().load(path)
    assert excinfo.value.code == "MESH_PARSE_ERROR"


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(MeshParseError):
        JsonMeshRepository().load(tmp_path / "absent.json")


def test_invalid_geometry_is_reported_unless_validation_is_off(tmp_path):
    document = {
        "name": "clockwise",
        "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]],
        "elements": [{"edges": [{"v": [0, 3]}, {"v": [3, 2]}, {"v": [2, 1]}, {"v": [1, 0]}]}],
    }
    path = tmp_path / "clockwise.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    repository = JsonMeshRepository()
    with pytest.raises(MeshValidationError):
        repository.load(path)
    assert repository.load(path, validate=False).n_elements == 1


def test_collector_renders_the_frozen_columns():
    collector = CsvResultCollector()
    collector.append(make_row())
    collector.append(make_row(problem="stokes", tau="mean", err_pressure=0.25, cond=float("nan"), diverged=True))
    lines = collector.render().splitlines()
    assert lines[0] == ",".join(RESULT_COLUMNS)
    first = dict(zip(RESULT_COLUMNS, lines[1].split(",")))
    assert first["tau"] == "1.0"
    assert first["tol"] == ""
    assert first["err_pressure"] == ""
    assert first["diverged"] == "0"
    second = dict(zip(RESULT_COLUMNS, lines[2].split(",")))
    assert second["tau"] == "mean"
    assert second["cond"] == "nan"
    assert second["diverged"] == "1"
    assert collector.any_diverged


def test_results_file_reads_back(tmp_path):
    collector = CsvResultCollector()
    rows = [make_row(k=k, tau=None, tol=10.0, l_max=2, formulation="V3") for k in (2, 3)]
    collector.extend(rows)
    collector.append(make_row(tau="mean", err_pressure=0.5))
    path = tmp_path / "results.csv"
    collector.write(path)
    assert read_results(path) == [*rows, make_row(tau="mean", err_pressure=0.5)]


def test_collector_is_safe_under_concurrent_appends():
    collector = CsvResultCollector()

    def worker(k):
        for _ in range(50):
            collector.append(make_row(k=k))

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(1, 5)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    assert len(collector.rows) == 200
    assert not collector.any_diverged
