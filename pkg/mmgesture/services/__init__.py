"""Services: signal processing, augmentation, segmentation, classification and I/O."""
