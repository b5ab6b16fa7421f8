import numpy as np
import pytest

import panelrect as pr


@pytest.fixture(scope="session")
def k():
    return pr.DEFAULT_INTRINSICS


@pytest.fixture(scope="session")
def panel_bundle():
    spec = pr.PanelSpec.vertical_pair()
    corners, mask, raster = pr.generate_reference(spec)
    return corners, mask, raster


@pytest.fixture
def square_corners():
    pts = np.array([[[10.0, 20.0], [50.0, 20.0], [50.0, 60.0], [10.0, 60.0]]])
    return pr.CornerSet(pr.Frame.PIXEL, pts)
