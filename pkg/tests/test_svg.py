import xml.etree.ElementTree as ET

from adiabatic_search.svg import render_scaling_figure

NS = {"s": "http://www.w3.org/2000/svg"}


def _curves():
    return {w: [(2 ** k, (1 + w) * 2 ** (k * (0.5 + 0.5 * w))) for k in range(3, 9)] for w in (1.0, 0.0, 0.5)}


def test_one_polyline_per_omega_in_order():
    svg = render_scaling_figure(_curves(), {0.0: 0.5, 1.0: 1.0})
    root = ET.fromstring(svg.split("\n", 1)[1])
    lines = root.findall("s:polyline", NS)
    assert [p.get("data-omega") for p in lines] == ["0", "0.5", "1"]
    legend = [t.text for t in root.findall("s:text", NS) if t.get("class") == "legend"]
    assert legend == ["omega=0 slope=0.500", "omega=0.5", "omega=1 slope=1.000"]
    texts = [t.text for t in root.findall("s:text", NS)]
    assert "log2 N" in texts and "log2 T" in texts
    assert root.get("version") == "1.1"


def test_deterministic_and_self_contained():
    a = render_scaling_figure(_curves())
    b = render_scaling_figure(dict(reversed(list(_curves().items()))))
    assert a == b
    assert "href" not in a and "<image" not in a


def test_skips_nonpositive_runtimes():
    svg = render_scaling_figure({0.0: [(8, 0.0), (16, 2.0), (32, float("nan")), (64, 4.0)]})
    root = ET.fromstring(svg.split("\n", 1)[1])
    pts = root.find("s:polyline", NS).get("points").split()
    assert len(pts) == 2
