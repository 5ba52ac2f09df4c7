import numpy as np
import pytest

from atlasedit.atlas_core.types import ValidationError
from atlasedit.edit_pipeline.schedule import NoiseSchedule, make_schedule


class TestMakeSchedule:
    def test_default_grid(self):
        s = make_schedule()
        assert s.t_train == 1000
        assert s.n_infer == 50
        assert s.alpha_bar[0] == 1.0
        assert s.alpha_bar[-1] <= 0.01
        assert np.all(np.diff(s.alpha_bar) < 0)
        assert s.inference_map[0] == 0
        assert s.inference_map[-1] == 1000
        assert s.inference_map.size == 51

    def test_index_accessors(self):
        s = make_schedule()
        assert s.alpha_bar_at(0) == 1.0
        assert s.timestep_at(s.n_infer) == s.t_train
        with pytest.raises(ValidationError):
            s.alpha_bar_at(51)
        with pytest.raises(ValidationError):
            s.timestep_at(-1)

    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            make_schedule(t_train=0)
        with pytest.raises(ValidationError):
            make_schedule(t_train=10, n_infer=20)


class TestScheduleInvariants:
    def _valid(self):
        s = make_schedule()
        return s.alpha_bar, s.inference_map

    def test_alpha_bar_must_decrease(self):
        ab, im = self._valid()
        bad = ab.copy()
        bad[5] = bad[4]
        with pytest.raises(ValidationError, match="decreasing"):
            NoiseSchedule(alpha_bar=bad, inference_map=im)

    def test_endpoints_enforced(self):
        ab, im = self._valid()
        with pytest.raises(ValidationError, match="0.999"):
            NoiseSchedule(alpha_bar=ab * 0.99, inference_map=im)
        dirty = np.linspace(1.0, 0.5, ab.size)
        with pytest.raises(ValidationError, match="0.01"):
            NoiseSchedule(alpha_bar=dirty, inference_map=im)

    def test_inference_map_monotone_and_bounded(self):
        ab, im = self._valid()
        bad = im.copy()
        bad[3] = bad[2]
        with pytest.raises(ValidationError, match="increasing"):
            NoiseSchedule(alpha_bar=ab, inference_map=bad)
        with pytest.raises(ValidationError, match="within"):
            NoiseSchedule(alpha_bar=ab, inference_map=im + 5)
