from networks.interfaces import Parameter, LayerInterface
from networks.layers import (
    he_normal,
    Conv2d,
    ConvTranspose2d,
    ReLU,
    LeakyReLU,
    Sequential,
)
from networks.pgc import (
    PERSPECTIVE_FIELDS,
    PGCBlock,
    pgc_block_forward,
    pgc_block_backward,
)
from networks.model import (
    PGC_KERNEL_SIZE,
    DensityNetwork,
    forward,
    expected_parameter_count,
    build_toy_net,
)
from networks.optim import SGD
from networks.training import (
    density_loss,
    feature_target,
    feature_roi,
    flip_horizontal,
    run_epochs,
    train,
    predict_count,
    mean_density_loss,
)
from networks.gradcheck import (
    KINK_MARGIN,
    GradientProbe,
    check_gradients,
    near_kink_parameters,
    network_probe,
    gradcheck,
)
from networks.penet import (
    PerspectiveScaler,
    PENet,
    build_penet,
    penet_forward,
)
from networks.phases import (
    train_phase1,
    train_phase2,
    estimate_perspectives,
    joint_loss_and_backward,
    finetune_phase3,
    joint_gradcheck,
)
