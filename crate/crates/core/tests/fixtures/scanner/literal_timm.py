# expect: L:timm/vit_base_patch16_224.augreg_in21k
import timm

net = timm.create_model("hf-hub:timm/vit_base_patch16_224.augreg_in21k", pretrained=True)
