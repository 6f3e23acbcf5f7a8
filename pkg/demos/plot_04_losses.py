"""
The training objective
======================

The generator outputs three class logits per pixel. It is trained with
per-pixel cross entropy plus an adversarial term from a critic that only
sees the path channel, with a WGAN gradient penalty.
"""

import math

import torch

from ganfinder.model import ModelBundle, gradient_penalty, supervised_loss, LossConfig

torch.manual_seed(0)

# uniform logits cost ln 3 per pixel whatever the target
y = torch.randint(0, 3, (2, 16, 16))
print(supervised_loss(torch.zeros(2, 3, 16, 16), y, LossConfig()).item(), math.log(3))

# a linear critic f(x) = sum(x) has gradient norm sqrt(H*W) everywhere
gp = gradient_penalty(lambda x: x.sum(dim=(1, 2, 3)), torch.rand(4, 1, 16, 16), torch.rand(4, 1, 16, 16))
print(gp.item(), (16 - 1) ** 2)

for name in ("ganfinder", "pix2pix-baseline"):
    bundle = ModelBundle.from_preset(name, 16, 16, base_features=16)
    print(bundle.describe())
