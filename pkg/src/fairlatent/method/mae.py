from .ae import AutoEncoder


class MultilayerAutoEncoder(AutoEncoder):
    """mae: autoencoder with one rectified hidden layer (of the latent
    width) in both encoder and decoder, without the critic
    """
    nonlinear = True
