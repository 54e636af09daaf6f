import xml.etree.ElementTree as ET

import numpy as np

from gasfold.svg import Series, line_plot, nice_ticks

NS = "{http://www.w3.org/2000/svg}"


def test_nice_ticks():
    assert list(nice_ticks(0.0, 1.0)) == [0.0, 0.2, 0.4, 0.6000000000000001 if False else 0.6, 0.8, 1.0]
    t = nice_ticks(-3.3, 7.1)
    assert t[0] >= -3.3 and t[-1] <= 7.1 and len(t) >= 3
    assert list(nice_ticks(np.nan, 1.0)) == [0.0]


def test_plot_is_self_contained_xml():
    x = np.linspace(0, 1, 50)
    y = np.sin(x)
    y[25] = np.nan
    doc = line_plot([Series(x, y, "sin <x>"), Series(x, x, "id", dash="4,2")], "title & more", "x", "y")
    root = ET.fromstring(doc)
    assert root.tag == NS + "svg"
    assert "href" not in doc and "http://" not in doc.replace('xmlns="http://www.w3.org/2000/svg"', "")
    polylines = root.iter(NS + "polyline")
    # the NaN splits the first series in two
    assert sum(1 for _ in polylines) == 3
    texts = [t.text for t in root.iter(NS + "text")]
    assert "sin <x>" in texts and "title & more" in texts and "x" in texts and "y" in texts


def test_empty_plot():
    ET.fromstring(line_plot([], "empty", "x", "y"))


def test_plot_deterministic():
    x = np.linspace(-1, 1, 7)
    a = line_plot([Series(x, x**2, "q")], "t", "x", "y")
    assert a == line_plot([Series(x, x**2, "q")], "t", "x", "y")
    assert "-0<" not in a
