"""Test cases for the models module."""
from trojanrec.utils import Activation, ModelFamily


class Families:
    """Model families.

    Emits these fields: "family"

    """

    def case_wrmf(self):
        """Matrix factorization."""
        return ModelFamily.WRMF

    def case_item_ae(self):
        """Item autoencoder."""
        return ModelFamily.ITEM_AE

    def case_mult_vae(self):
        """Multinomial VAE."""
        return ModelFamily.MULT_VAE


class Presets:
    """Packaged training presets.

    Emits these fields: "family, learning_rate, batch_size"

    """

    def case_wrmf(self):
        """WRMF preset."""
        return ModelFamily.WRMF, 0.01, 2048

    def case_item_ae(self):
        """ItemAE preset."""
        return ModelFamily.ITEM_AE, 0.001, 2048

    def case_mult_vae(self):
        """Mult-VAE preset."""
        return ModelFamily.MULT_VAE, 0.001, 1024


class AutoencoderSetups:
    """Autoencoder gradient setups.

    Emits these fields: "activation"

    """

    def case_tanh(self):
        """Tanh hidden layer."""
        return Activation.TANH

    def case_identity(self):
        """Linear hidden layer."""
        return Activation.IDENTITY


class BadConfigs:
    """Invalid training configs.

    Emits these fields: "overrides"

    """

    def case_latent(self):
        """No latent dimension."""
        return {"latent_dim": 0}

    def case_l2(self):
        """Negative ridge."""
        return {"l2_weight": -1.0}

    def case_c_pos(self):
        """Confidence below one."""
        return {"c_pos": 0.5}

    def case_lr(self):
        """Zero learning rate."""
        return {"learning_rate": 0.0}

    def case_beta(self):
        """KL weight above one."""
        return {"beta_kl": 1.5}
