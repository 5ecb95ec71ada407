"""Round-trips a few meshes through the Python bindings."""

import pyqebc


def main():
    cube = pyqebc.shape("cube")
    data = pyqebc.compress(cube)
    back = pyqebc.decompress(data)
    assert (back.vertex_count, back.face_count) == (8, 6)
    assert pyqebc.verify(cube)["faces"] == 6

    grid = pyqebc.shape("grid", rows=12, cols=12)
    for mode in ("fixed", "entropy"):
        data = pyqebc.compress(grid, mode=mode, keep_order=True, geometry=True)
        back = pyqebc.decompress(data)
        assert back.canonical_faces() == grid.canonical_faces()
        assert back.coords() == grid.coords()

    text = pyqebc.shape("cube").to_text("off")
    assert pyqebc.Mesh.parse(text, "off").topo_counts()["genus"] == 0
    codes = pyqebc.encode_clers(cube)
    assert len(codes) == 6 and all(len(c) == 2 for c in codes)

    row = pyqebc.analyze(grid, "grid", seeds=2)
    assert row["entropy_n3_bpv"] < row["random_split_n3_bpv"]

    try:
        pyqebc.decompress(data[:-1] + bytes([data[-1] ^ 1]))
    except ValueError as e:
        assert "checksum" in str(e)
    else:
        raise AssertionError("corrupt container accepted")
    print("ok:", pyqebc.verify(grid))


if __name__ == "__main__":
    main()
