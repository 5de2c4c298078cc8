import numpy as np
import pandas as pd

from utils.fetch import field_frame
from utils.plot import drift_plot, dual_axis_plot, field_profile_plot, single_line_plot


def test_dual_axis_plot_uses_second_axis():
    df = pd.DataFrame({"t": [0.0, 0.1, 0.2], "l6": [1.0, 0.9, 0.8], "morawetz_action": [0.0, 0.1, 0.15]})
    fig = dual_axis_plot(df, x="t", y1="l6", y2="morawetz_action")
    assert len(fig.data) == 2
    assert fig.data[1].yaxis == "y2"
    assert fig.layout.xaxis.title.text == "t"


def test_dual_axis_plot_skips_missing_column():
    df = pd.DataFrame({"t": [0.0, 1.0], "l6": [1.0, 0.5]})
    assert len(dual_axis_plot(df, x="t", y1="l6", y2="absent").data) == 1


def test_single_line_plot_log_axes_drops_nonpositive():
    df = pd.DataFrame({"t": [1.0, 2.0, 4.0], "norm": [0.0, 0.5, 0.25]})
    fig = single_line_plot(df, x="t", y="norm", log_axes=True)
    assert list(fig.data[0].y) == [0.5, 0.25]
    assert fig.layout.xaxis.type == "log" and fig.layout.yaxis.type == "log"


def test_field_profile_plot_window(bump):
    fig = field_profile_plot(field_frame(bump), r_max=5.0)
    assert [t.name for t in fig.data] == ["|u|", "Re u", "Im u"]
    assert max(fig.data[0].x) <= 5.0
    np.testing.assert_allclose(fig.data[0].y, np.abs(fig.data[1].y), atol=1e-15)


def test_drift_plot_relative_to_start():
    df = pd.DataFrame({"t": [0.0, 1.0], "mass": [2.0, 2.2], "energy": [1.0, 1.0]})
    fig = drift_plot(df, columns=("mass", "energy", "missing"))
    assert [t.name for t in fig.data] == ["mass", "energy"]
    np.testing.assert_allclose(fig.data[0].y, [0.0, 0.1])
