"""
Unmixing three images
=====================

Three synthetic 32x32 RGB rasters stand in for photographs.  Each image is
one signal of 3072 values; the mixture is quantized to 0..255 as an image
file would be, separated, and written back out as PPM files.
"""

# %%
import numpy as np

from _paths import OUT
from igbss import evaluate, gen_images_mixture, gen_mixing, separate
from igbss.datagen import flatten_images
from igbss.io import write_ppm

yy, xx = np.mgrid[0:32, 0:32]
gradient = np.stack([xx * 8, yy * 8, 255 - xx * 4], axis=-1)
checker = np.repeat((((xx // 8) + (yy // 8)) % 2 * 255)[..., None], 3, axis=-1)
disk = np.stack([((xx - 16) ** 2 + (yy - 16) ** 2 < 120) * 230,
                 np.full_like(xx, 40), (yy * 6) % 256], axis=-1)
images = [gradient, checker, disk]

# %%
Xq, record = gen_images_mixture(images, gen_mixing(3, 3, 1, 1.0, 6.0, seed=0))
print("mixture range:", Xq.min(), Xq.max(), "scale", round(record.scale, 4))

# %%
truth = flatten_images(images)
r = separate(Xq.astype(float), 3, scheme="minmax")
m = evaluate(r.recovered, truth)
print("iterations %d, RMSE %.3f, SNR %.2f dB, permutation %s"
      % (r.report.iterations, m["rmse"], m["snr_db"], m["permutation"]))

# %%
for i, img in enumerate(images):
    write_ppm(OUT / ("source_%d.ppm" % i), img)
    write_ppm(OUT / ("mixed_%d.ppm" % i), Xq[i].reshape(32, 32, 3))
    out = np.rint(m["matched"][i] * 255).reshape(32, 32, 3)
    write_ppm(OUT / ("recovered_%d.ppm" % i), out)
print("wrote PPM files to", OUT)
