"""
Spectrogram versus S-method on a chirp
======================================

A linear FM signal is analysed with a Hanning-windowed STFT.  The
spectrogram smears the ridge over several bins; the S-method combines
neighbouring STFT bins and concentrates it.
"""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from csvel import WindowSpec, s_method, spectrogram, stft

# instantaneous frequency sweeps from 0.2 to 1.2 rad/sample
n = 256
t = np.arange(n)
x = np.exp(1j * (0.2 * t + 0.5 * t**2 / n))

X = stft(x, WindowSpec("hanning", 64))
spec = spectrogram(X)
sm = s_method(X, 3)

###############################################################################
# Concentration: ridge peak over the column's total energy
for name, m in (("SPEC", spec), ("SM L=3", sm)):
    conc = m.data.max(axis=1) / m.data.sum(axis=1)
    print(f"{name:7s} mean concentration over interior columns: {conc[32:-32].mean():.3f}")

###############################################################################
# Side by side
fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
extent = [X.freq_bins[0], X.freq_bins[-1], 0, n]
for ax, m, title in zip(axes, (spec, sm), ("spectrogram", "S-method, L=3")):
    ax.imshow(np.clip(m.data, 0, None), aspect="auto", origin="lower", extent=extent)
    ax.set_title(title)
    ax.set_xlabel("frequency bin")
axes[0].set_ylabel("time")
fig.tight_layout()
fig.savefig("time_frequency.png", dpi=80)
