# Copyright 2026 The rfcnn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import rfcnn


def test_table():
    ok, mismatched = rfcnn.check_table2()
    assert ok and mismatched == []
    assert rfcnn.max_rf(5) == (87, 87)
    assert rfcnn.published_max_rf()[-1] == 583
    assert rfcnn.rho_to_kernels(0) == [1] * 22


def test_bad_rho():
    with pytest.raises(IndexError):
        rfcnn.max_rf(23)


def test_dsp_values():
    assert abs(rfcnn.a_weighting_db(1000.0)) < 0.01
    assert rfcnn.hz_to_mel(700.0) == pytest.approx(781.17, abs=0.01)
    fb = rfcnn.mel_filterbank(64, 1025, 22050)
    assert fb.shape == (64, 1025)
    assert (fb >= 0).all()


def test_spectrogram_shape():
    t = np.arange(22050 * 2) / 22050.0
    audio = 0.5 * np.sin(2 * math.pi * 440.0 * t)[None, :]
    s = rfcnn.spectrogram(audio, 22050)
    assert s.shape == (1, 2, 256, (len(t) - 2048) // 1536 + 1)
    assert s.dtype == np.float32
    assert np.isfinite(s).all()
    np.testing.assert_array_equal(s[0, 0], s[0, 1])


def test_network_roundtrip(tmp_path):
    x, labels = rfcnn.synth(n=4, mels=32, frames=16, pattern=4, margin=4, spacing=12)
    assert x.shape == (4, 1, 32, 16)
    assert labels == [0, 1, 0, 1]
    net = rfcnn.Network(2, "freq-aware", classes=2, width=4, in_channels=1, seed=3)
    net.training = False
    p = net.predict_proba(x)
    assert p.shape == (4, 2, 1, 1)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=1e-5)
    assert "fc.w" in net.parameter_names()

    path = str(tmp_path / "net.rfck")
    net.save(path)
    back = rfcnn.Network.load(path)
    back.training = False
    np.testing.assert_array_equal(back.forward(x), net.forward(x))
    assert back.parameter_count == net.parameter_count


def test_schedule():
    assert rfcnn.lr_at(1) == pytest.approx(1e-4)
    assert rfcnn.lr_at(150) == pytest.approx(5.25e-5)
    assert rfcnn.lr_at(300) == pytest.approx(5e-6)
